// Copyright 2026, The bictriage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "bictriage/sample.hpp"
#include "testutil.hpp"

using namespace bictriage;

namespace {

DailyBatch parse_text(const std::string& text, std::uint32_t m_count) {
  std::istringstream in(text);
  return parse_daily_file(in, FeatureSpace{m_count}, "test.jsonl");
}

std::string render(const DailyBatch& batch) {
  std::ostringstream out;
  write_daily_file(batch, out);
  return out.str();
}

}  // namespace

TEST_CASE("parses well-formed records") {
  const auto batch = parse_text(
      "{\"id\":\"a1\",\"label\":1,\"bics\":[0,5]}\n"
      "{\"id\":\"a2\",\"label\":null,\"bics\":[]}\n",
      6);
  REQUIRE(batch.samples.size() == 2);
  CHECK(batch.samples[0] == testutil::sample("a1", {0, 5}, 1));
  CHECK(batch.samples[1] == testutil::unlabeled("a2", {}));
}

TEST_CASE("rejects non-ascending BIC lists") {
  CHECK_THROWS_WITH_AS(parse_text("{\"id\":\"a3\",\"label\":0,\"bics\":[5,0]}\n", 6),
                       doctest::Contains("non-ascending"), ParseError);
  CHECK_THROWS_WITH_AS(parse_text("{\"id\":\"a4\",\"label\":0,\"bics\":[2,2]}\n", 6),
                       doctest::Contains("non-ascending"), ParseError);
}

TEST_CASE("rejects out-of-range indices, duplicates and malformed lines") {
  CHECK_THROWS_WITH_AS(parse_text("{\"id\":\"x\",\"label\":1,\"bics\":[6]}\n", 6),
                       doctest::Contains("out of range"), ParseError);
  CHECK_THROWS_WITH_AS(parse_text("{\"id\":\"x\",\"label\":1,\"bics\":[0]}\n"
                                  "{\"id\":\"x\",\"label\":0,\"bics\":[1]}\n",
                                  6),
                       doctest::Contains("duplicate sample id"), ParseError);
  CHECK_THROWS_WITH_AS(parse_text("{\"id\":\"x\",\"label\":1,\"bics\":[0]}\n"
                                  "{not json}\n",
                                  6),
                       doctest::Contains("test.jsonl:2"), ParseError);
  CHECK_THROWS_AS(parse_text("{\"id\":\"x\",\"label\":2,\"bics\":[]}\n", 6), ParseError);
  CHECK_THROWS_AS(parse_text("{\"id\":\"\",\"label\":1,\"bics\":[]}\n", 6), ParseError);
  CHECK_THROWS_AS(parse_text("{\"id\":\"x\",\"bics\":[]}\n", 6), ParseError);
  CHECK_THROWS_AS(parse_text("{\"id\":\"x\",\"label\":1,\"bics\":[],\"zz\":1}\n", 6),
                  ParseError);
  CHECK_THROWS_AS(parse_text("{\"id\":\"x\",\"label\":1,\"bics\":[-1]}\n", 6), ParseError);
}

TEST_CASE("error messages carry the source and line number") {
  try {
    parse_text("{\"id\":\"ok\",\"label\":0,\"bics\":[]}\n{\"id\":\"bad\",\"label\":0,\"bics\":[9]}\n", 4);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.source() == "test.jsonl");
    CHECK(e.line() == 2);
  }
}

TEST_CASE("write then parse is the identity") {
  std::mt19937_64 rng(42);
  for (int round = 0; round < 20; ++round) {
    const std::uint32_t m_count = 1 + static_cast<std::uint32_t>(rng() % 32);
    DailyBatch batch;
    batch.samples.resize(rng() % 10);
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
      auto& s = batch.samples[i];
      s.id = "id" + std::to_string(i);
      for (std::uint32_t bic = 0; bic < m_count; ++bic) {
        if (rng() % 3 == 0) {
          s.bics.push_back(bic);
        }
      }
      const auto coin = rng() % 3;
      s.label = coin == 2 ? std::nullopt
                          : std::optional<Label>(label_from_int(static_cast<int>(coin)));
    }
    auto parsed = parse_text(render(batch), m_count);
    parsed.day = batch.day;
    CHECK(parsed == batch);
  }
}

TEST_CASE("accepted streams re-serialize to a canonical fixed point") {
  const std::string noisy =
      "{\"bics\": [1, 3], \"id\": \"z9\", \"label\": 0}\n"
      "{\"label\":null,\"id\":\"z10\",\"bics\":[]}\n";
  const auto once = render(parse_text(noisy, 8));
  const auto twice = render(parse_text(once, 8));
  CHECK(once == twice);
  CHECK(once ==
        "{\"id\":\"z9\",\"label\":0,\"bics\":[1,3]}\n"
        "{\"id\":\"z10\",\"label\":null,\"bics\":[]}\n");
}

TEST_CASE("empty batch writes zero records and order is preserved") {
  CHECK(render(DailyBatch{}) == "");
  const auto batch = parse_text(
      "{\"id\":\"c\",\"label\":1,\"bics\":[]}\n"
      "{\"id\":\"a\",\"label\":1,\"bics\":[]}\n"
      "{\"id\":\"b\",\"label\":1,\"bics\":[]}\n",
      2);
  REQUIRE(batch.samples.size() == 3);
  CHECK(batch.samples[0].id == "c");
  CHECK(batch.samples[1].id == "a");
  CHECK(batch.samples[2].id == "b");
}

TEST_CASE("dense_vector places ones at triggered indices") {
  const FeatureSpace space{4};
  CHECK(dense_vector(testutil::sample("a", {}, 1), space) ==
        std::vector<std::uint8_t>{0, 0, 0, 0});
  CHECK(dense_vector(testutil::sample("b", {1, 3}, 1), space) ==
        std::vector<std::uint8_t>{0, 1, 0, 1});
  CHECK(dense_vector(testutil::sample("c", {0, 1, 2, 3}, 1), space) ==
        std::vector<std::uint8_t>{1, 1, 1, 1});
}

TEST_CASE("sparse dense duality") {
  std::mt19937_64 rng(9);
  const FeatureSpace space{24};
  for (int round = 0; round < 30; ++round) {
    LabeledSample s;
    s.id = "s";
    for (std::uint32_t bic = 0; bic < space.m_count; ++bic) {
      if (rng() % 4 == 0) {
        s.bics.push_back(bic);
      }
    }
    const auto dense = dense_vector(s, space);
    CHECK(std::accumulate(dense.begin(), dense.end(), std::size_t{0}) == s.bics.size());
  }
}

TEST_CASE("dataset directory helpers") {
  testutil::TempDir dir;
  const FeatureSpace space{5};
  write_meta(space, dir.path());
  CHECK(read_meta(dir.path()).m_count == 5);

  DailyBatch day1{"2024-01-02", {testutil::sample("a", {0}, 1)}};
  DailyBatch day0{"2024-01-01", {testutil::sample("b", {1}, 0)}};
  save_daily_file(day1, dir.path() / "2024-01-02.jsonl");
  save_daily_file(day0, dir.path() / "2024-01-01.jsonl");
  testutil::write_file(dir.path() / "notes.txt", "ignored");

  const auto files = list_daily_files(dir.path());
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "2024-01-01.jsonl");
  CHECK(files[1].filename() == "2024-01-02.jsonl");

  const auto loaded = load_daily_file(files[1], space);
  CHECK(loaded == day1);
}

TEST_CASE("meta validation") {
  testutil::TempDir dir;
  testutil::write_file(dir.path() / "meta.json", "{\"m_count\":0}");
  CHECK_THROWS_AS(read_meta(dir.path()), ParseError);
  testutil::write_file(dir.path() / "meta.json", "not json");
  CHECK_THROWS_AS(read_meta(dir.path()), ParseError);
  CHECK_THROWS_AS(read_meta(dir.path() / "missing"), ParseError);
}
