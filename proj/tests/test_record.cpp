// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "helpers.hpp"
#include "seqguard/error.hpp"
#include "seqguard/record.hpp"

using namespace seqguard;
using namespace seqguard::testing;

namespace {

TrajectoryRecord good_record() {
  return {"r1", "Pay my phone bill", {"Look up bill", "Pay \"bill\" now é"},
          Label::good, "galileo", {}};
}

}  // namespace

TEST_CASE("labels parse and print") {
  CHECK(parse_label("good") == Label::good);
  CHECK(parse_label("anomaly") == Label::anomaly);
  CHECK(to_string(Label::anomaly) == "anomaly");
  CHECK_THROWS_AS(parse_label("bad"), FormatError);
}

TEST_CASE("record invariants") {
  auto rec = good_record();
  CHECK_NOTHROW(rec.validate());
  rec.steps.clear();
  CHECK_THROWS_AS(rec.validate(), PreconditionError);

  rec = good_record();
  rec.injected_positions = {0};
  CHECK_THROWS_AS(rec.validate(), PreconditionError);

  rec.label = Label::anomaly;
  CHECK_NOTHROW(rec.validate());
  rec.injected_positions = {};
  CHECK_THROWS_AS(rec.validate(), PreconditionError);
  rec.injected_positions = {2};
  CHECK_THROWS_AS(rec.validate(), PreconditionError);
}

TEST_CASE("dataset JSONL round trip is lossless") {
  const auto dir = scratch_dir("record");
  auto anomaly = good_record();
  anomaly.id = "r1-anom";
  anomaly.label = Label::anomaly;
  anomaly.injected_positions = {1};
  const std::vector<TrajectoryRecord> records = {good_record(), anomaly};
  write_dataset(dir / "d.jsonl", records);
  CHECK(read_dataset(dir / "d.jsonl") == records);
}

TEST_CASE("malformed dataset lines name the line") {
  const auto dir = scratch_dir("record-bad");
  const auto good = to_json(good_record()).dump();
  write_file(dir / "a.jsonl", good + "\n{not json\n");
  try {
    read_dataset(dir / "a.jsonl");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
  }
  write_file(dir / "b.jsonl", good + "\n" + good + "\n");
  try {
    read_dataset(dir / "b.jsonl");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
  }
  write_file(dir / "c.jsonl", R"({"id":"x","task":"t","steps":[],"label":"good","source":"s"})");
  CHECK_THROWS(read_dataset(dir / "c.jsonl"));
  CHECK_THROWS_AS(read_dataset(dir / "missing.jsonl"), IoError);
}

TEST_CASE("round_f32 keeps the float value and is idempotent") {
  for (double v : {0.1, -3.14159265358979, 1e-30, 12345.678}) {
    const double r = round_f32(v);
    CHECK(static_cast<float>(r) == static_cast<float>(v));
    CHECK(round_f32(r) == r);
  }
  CHECK(round_f32(0.1) == 0.1);
}
