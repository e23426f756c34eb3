// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "seqguard/embed.hpp"
#include "seqguard/error.hpp"

using namespace seqguard;
using namespace seqguard::testing;

TEST_CASE("tokenize lowercases and splits camel case and punctuation") {
  CHECK(tokenize("GetNewMusicReleases") ==
        std::vector<std::string>{"get", "new", "music", "releases"});
  CHECK(tokenize("Check roaming-charges, now!") ==
        std::vector<std::string>{"check", "roaming", "charges", "now"});
  CHECK(tokenize(R"({"name":"rm","arguments":{"path":"/"}})") ==
        std::vector<std::string>{"name", "rm", "arguments", "path"});
  CHECK(tokenize("").empty());
}

TEST_CASE("hash_embed is deterministic and unit norm") {
  const Vector a = hash_embed("check roaming charges", 384, 0);
  CHECK(a == hash_embed("check roaming charges", 384, 0));
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a != hash_embed("check roaming charges", 384, 1));
  CHECK(hash_embed("Check Roaming charges", 384, 0) == a);
}

TEST_CASE("empty text maps to the zero vector") {
  CHECK(hash_embed("", 64, 0) == Vector::Zero(64));
  CHECK(hash_embed("  ,;!  ", 64, 0) == Vector::Zero(64));
}

TEST_CASE("dim below 8 is rejected") {
  CHECK_THROWS_AS(hash_embed("x", 7, 0), PreconditionError);
  CHECK_THROWS_AS(HashEmbedder(4), PreconditionError);
}

TEST_CASE("unrelated phrases are far apart") {
  const double cos = hash_embed("check roaming charges", 384, 0)
                         .dot(hash_embed("delete all files", 384, 0));
  // Regression fixture: no shared tokens, so only bucket collisions remain.
  CHECK(cos == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cos < 0.5);
  const double related = hash_embed("check roaming charges", 384, 0)
                             .dot(hash_embed("check data charges", 384, 0));
  CHECK(related == doctest::Approx(2.0 / 3.0).epsilon(0.2));
}

TEST_CASE("embed_dataset keeps step order") {
  const std::vector<TrajectoryRecord> recs = {
      {"a", "task one", {"first step", "second step", "third"}, Label::good, "s", {}}};
  const HashEmbedder emb(32, 0);
  const EmbeddingTable t = embed_dataset(recs, emb);
  REQUIRE(t.size() == 1);
  CHECK(t.at("a").steps.rows() == 3);
  CHECK(t.at("a").steps.row(1).transpose() == emb.embed("second step"));
  CHECK(t.at("a").task == emb.embed("task one"));
  CHECK_THROWS_AS(t.at("zzz"), PreconditionError);
}

TEST_CASE("embedding file round trip is exact at 32-bit precision") {
  const auto dir = scratch_dir("embed");
  Rng rng(3);
  EmbeddingTable t(8);
  for (int i = 0; i < 5; ++i)
    t.add({"id" + std::to_string(i), random_vector(8, rng),
           random_matrix(1 + i, 8, rng)});
  save_embeddings(dir / "e.jsonl", t);
  const EmbeddingTable back = load_embeddings(dir / "e.jsonl");
  REQUIRE(back.size() == t.size());
  CHECK(back.dim() == 8);
  for (const auto& e : t) {
    const auto& b = back.at(e.id);
    CHECK(b.task == e.task.unaryExpr([](double v) { return round_f32(v); }));
    CHECK(b.steps == e.steps.unaryExpr([](double v) { return round_f32(v); }));
  }
  // A second trip changes nothing.
  save_embeddings(dir / "f.jsonl", back);
  CHECK(read_file(dir / "e.jsonl") == read_file(dir / "f.jsonl"));
}

TEST_CASE("load_embeddings examples and errors") {
  const auto dir = scratch_dir("embed-bad");
  write_file(dir / "one.jsonl",
             R"({"id":"a","task_vec":[1,0,0,0],"step_vecs":[[1,2,3,4],[0,0,0,1],[5,5,5,5]]})"
             "\n");
  const auto one = load_embeddings(dir / "one.jsonl");
  CHECK(one.size() == 1);
  CHECK(one.at("a").steps.rows() == 3);
  CHECK(one.at("a").steps(2, 0) == 5.0);

  write_file(dir / "dim.jsonl",
             R"({"id":"a","task_vec":[1,0,0,0],"step_vecs":[[1,2,3,4]]})"
             "\n"
             R"({"id":"b","task_vec":[1,0,0,0,0],"step_vecs":[[1,2,3,4,5]]})"
             "\n");
  try {
    load_embeddings(dir / "dim.jsonl");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("dimension") != std::string::npos);
  }

  write_file(dir / "dup.jsonl",
             R"({"id":"a","task_vec":[1],"step_vecs":[[1]]})"
             "\n"
             R"({"id":"a","task_vec":[1],"step_vecs":[[1]]})"
             "\n");
  try {
    load_embeddings(dir / "dup.jsonl");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
  }

  write_file(dir / "bad.jsonl", "{\"id\": 3}\n");
  CHECK_THROWS_AS(load_embeddings(dir / "bad.jsonl"), FormatError);
}

TEST_CASE("align_embeddings checks coverage and step counts") {
  const std::vector<TrajectoryRecord> recs = {
      {"a", "t", {"x", "y"}, Label::good, "s", {}}};
  EmbeddingTable t(8);
  t.add({"a", Vector::Zero(8), Matrix::Zero(3, 8)});
  CHECK_THROWS_AS(align_embeddings(recs, t), PreconditionError);
  CHECK_THROWS_AS(align_embeddings(recs, EmbeddingTable(8)), PreconditionError);
}
