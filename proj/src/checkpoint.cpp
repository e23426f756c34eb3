// SPDX-License-Identifier: Apache-2.0
#include "seqguard/error.hpp"
#include "seqguard/io.hpp"
#include "seqguard/model.hpp"

namespace seqguard {

void save_checkpoint(const GuardModel& m, const std::filesystem::path& path) {
  m.validate();
  Json tensors = Json::object();
  m.visit([&](const TensorView& t) {
    Json values = Json::array();
    for (Eigen::Index i = 0; i < t.size(); ++i) values.push_back(round_f32(t.data[i]));
    tensors[std::string(t.name)] = std::move(values);
  });
  Json doc{{"version", kCheckpointVersion},
           {"dims", {{"d", m.dims.d}, {"h_mid", m.dims.h_mid}, {"l", m.dims.l}}},
           {"seed", m.seed},
           {"tensors", std::move(tensors)}};
  write_file(path, doc.dump() + "\n");
}

GuardModel load_checkpoint(const std::filesystem::path& path) {
  const Json doc = read_json(path);
  if (!doc.is_object() || !doc.contains("version"))
    throw FormatError(path.string() + ": not a checkpoint (no version)");
  if (!doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kCheckpointVersion)
    throw VersionError(path.string() + ": unsupported checkpoint version " +
                       doc["version"].dump());
  try {
    const Json& dims = doc.at("dims");
    ModelDims d{dims.at("d").get<int>(), dims.at("h_mid").get<int>(),
                dims.at("l").get<int>()};
    GuardModel m = GuardModel::zeros(d);
    m.seed = doc.value("seed", std::uint64_t{0});
    const Json& tensors = doc.at("tensors");
    if (tensors.size() != tensor_names().size())
      throw FormatError(path.string() + ": expected " +
                        std::to_string(tensor_names().size()) + " tensors, found " +
                        std::to_string(tensors.size()));
    m.visit([&](const TensorView& t) {
      const std::string name(t.name);
      if (!tensors.contains(name))
        throw FormatError(path.string() + ": missing tensor " + name);
      const Json& values = tensors[name];
      if (!values.is_array() || values.size() != static_cast<std::size_t>(t.size()))
        throw DimensionError(path.string() + ": tensor " + name + " has " +
                             std::to_string(values.size()) +
                             " values, dims require " + std::to_string(t.size()));
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        const Json& v = values[static_cast<std::size_t>(i)];
        if (!v.is_number())
          throw FormatError(path.string() + ": non-numeric value in " + name);
        t.data[i] = static_cast<double>(v.get<float>());
      }
    });
    const Vector flat = m.flatten();
    require_finite(flat, "checkpoint " + path.string());
    return m;
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace seqguard
