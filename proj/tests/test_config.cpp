#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "snnens/config.hpp"
#include "snnens/errors.hpp"

using namespace snnens;

namespace {

const char* kMinimal = R"({
  "dataset": {"kind": "synthetic", "synthetic": {"seed": 4}},
  "n_classes": 2,
  "simulation": {"encode_seed": 9},
  "ensemble": {"seeds": [1, 2]},
  "decoders": [{"method": "bayes", "window_ms": 10}, {"method": "norm_hmfr", "normalization": "max"}],
  "combiners": ["ngm", "am"]
})";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("parse_config reads a minimal config") {
  const auto c = parse_config(kMinimal);
  CHECK(c.dataset.kind == "synthetic");
  CHECK(c.dataset.synthetic.seed == 4);
  CHECK(c.member_seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(c.encode_seed == 9);
  REQUIRE(c.decoders.size() == 2);
  CHECK(c.decoders[0].label() == "bayes@10ms");
  CHECK(c.decoders[1].label() == "norm_hmfr[max]@350ms");
  CHECK(c.n_exc == 100);
  CHECK(c.network.w_inh_exc == 1.0);
}

TEST_CASE("parse_config rejects unknown keys, missing seeds and bad values") {
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"n_classes\"", "\"n_clases\"")), ConfigError);
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"encode_seed\": 9", "\"dt_ms\": 0.5")), ConfigError);
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "{\"seed\": 4}", "{}")), ConfigError);
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "[1, 2]", "[]")), ConfigError);
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"am\"", "\"median\"")), ConfigError);
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"max\"", "\"l2\"")), ConfigError);
  CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"n_classes\": 2", "\"n_classes\": \"two\"")), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  try {
    parse_config(replace(kMinimal, "\"window_ms\": 10", "\"window\": 10"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("config.decoders[0].window") != std::string::npos);
  }
}

TEST_CASE("config hash is stable and sensitive") {
  const auto a = parse_config(kMinimal);
  CHECK(config_hash(a) == config_hash(parse_config(kMinimal)));
  CHECK(config_hash(a) != config_hash(parse_config(replace(kMinimal, "[1, 2]", "[1, 3]"))));
  CHECK(canonical_config(a).find("\"seeds\"") != std::string::npos);
}

TEST_CASE("load_config resolves dataset paths against the config directory") {
  const auto dir = std::filesystem::temp_directory_path() / "snnens-test-config";
  std::filesystem::create_directories(dir);
  const auto p = dir / "c.json";
  std::ofstream(p) << R"({
    "dataset": {"kind": "idx", "train_images": "d/ti", "train_labels": "d/tl", "test_images": "d/si", "test_labels": "/abs/sl"},
    "simulation": {"encode_seed": 1},
    "ensemble": {"seeds": [5]}
  })";
  const auto c = load_config(p);
  CHECK(c.dataset.train_images == dir / "d/ti");
  CHECK(c.dataset.test_labels == std::filesystem::path("/abs/sl"));
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}
