#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fuzz.hpp"
#include "helpers.hpp"
#include "snnens/data_io.hpp"
#include "snnens/decode.hpp"
#include "snnens/errors.hpp"
#include "snnens/training.hpp"

using namespace snnens;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SNNENS_DATA_DIR;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "snnens-test-data-io";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> be32(std::uint32_t v) {
  return {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
}

void write_idx_pair(const fs::path& img, const fs::path& lab, std::uint32_t n_img, std::uint32_t n_lab,
                    std::size_t pixels_written) {
  std::vector<unsigned char> a;
  for (auto v : {kIdxImageMagic, n_img, 28u, 28u}) {
    auto b = be32(v);
    a.insert(a.end(), b.begin(), b.end());
  }
  a.resize(a.size() + pixels_written, 7);
  write_bytes(img, a);
  std::vector<unsigned char> l;
  for (auto v : {kIdxLabelMagic, n_lab}) {
    auto b = be32(v);
    l.insert(l.end(), b.begin(), b.end());
  }
  l.resize(l.size() + n_lab, 3);
  write_bytes(lab, l);
}

}  // namespace

TEST_CASE("read_idx on the bundled MNIST sample") {
  // Expected values come from an independent reader over the same files.
  const auto train = read_idx(kData / "train-images-idx3-ubyte", kData / "train-labels-idx1-ubyte", 5);
  REQUIRE(train.size() == 5);
  std::vector<int> labels;
  for (const auto& x : train) labels.push_back(x.label);
  CHECK(labels == std::vector<int>{1, 4, 5, 4, 3});

  const auto all_train = read_idx(kData / "train-images-idx3-ubyte", kData / "train-labels-idx1-ubyte");
  CHECK(all_train.size() == 4000);

  const auto test = read_idx(kData / "test-images-idx3-ubyte", kData / "test-labels-idx1-ubyte", 1);
  long sum = 0;
  for (auto p : test[0].pixels) sum += p;
  CHECK(sum == 21419);

  CHECK(read_idx(kData / "train-images-idx3-ubyte", kData / "train-labels-idx1-ubyte", 0).empty());
}

TEST_CASE("read_idx rejects malformed files") {
  const auto img = scratch("img"), lab = scratch("lab");
  write_idx_pair(img, lab, 3, 2, 3 * 784);
  CHECK_THROWS_AS(read_idx(img, lab), FormatError);

  write_idx_pair(img, lab, 3, 3, 2 * 784 + 10);
  CHECK_THROWS_AS(read_idx(img, lab), FormatError);

  write_idx_pair(img, lab, 2, 2, 2 * 784);
  CHECK(read_idx(img, lab).size() == 2);
  CHECK_THROWS_AS(read_idx(lab, img), FormatError);  // swapped magics
  CHECK_THROWS_AS(read_idx(scratch("missing"), lab), FormatError);
}

TEST_CASE("spike record files") {
  SUBCASE("empty list round-trips") {
    const auto p = scratch("empty.jsonl");
    write_records(p, std::vector<SpikeRecord>{});
    CHECK(fs::file_size(p) == 0);
    CHECK(read_records(p).empty());
  }
  SUBCASE("invalid records are refused") {
    const std::vector<SpikeRecord> bad{testing::make_record({{5.0, 3.0}})};
    CHECK_THROWS_AS(write_records(scratch("bad.jsonl"), bad), DomainError);
  }
  SUBCASE("unknown keys and bad lines name the line") {
    const auto good = record_to_line(testing::make_record({{1.0}}, 350.0, 2));
    const auto p = scratch("mixed.jsonl");
    {
      std::ofstream out(p);
      out << good << '\n' << R"({"example_id":"x","trial":0,"duration_ms":350,"label":null,"trains":[],"extra":1})" << '\n';
    }
    try {
      read_records(p);
      FAIL("expected a FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(record_from_line(R"({"example_id":"x","trial":0,"duration_ms":350,"label":null,"trains":[[3,1]]})", 1),
                    FormatError);
    CHECK_THROWS_AS(record_from_line("not json", 1), FormatError);
  }
  SUBCASE("fuzzed records round-trip byte-stably") {
    fuzz::Rng rng(10);
    std::vector<SpikeRecord> recs;
    for (std::size_t i = 0; i < 2000; ++i) recs.push_back(fuzz::record(rng, i));
    const auto p = scratch("fuzz.jsonl");
    write_records(p, recs);
    const auto back = read_records(p);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      REQUIRE(back[i] == recs[i]);
      REQUIRE(record_to_line(back[i]) == record_to_line(recs[i]));
    }
  }
}

TEST_CASE("synthetic_temporal") {
  SyntheticOptions o;
  o.n_per_class = 5000;
  o.n_neurons = 4;
  o.seed = 77;
  const auto recs = synthetic_temporal(o);
  REQUIRE(recs.size() == 10000);
  CHECK(*recs[0].label == 0);
  CHECK(*recs[1].label == 1);

  double total[2] = {0, 0}, first[2] = {0, 0};
  const WindowSpec halves(o.duration_ms / 2, o.duration_ms);
  for (const auto& r : recs) {
    CHECK(validate_record(r).empty());
    const auto rates = estimate_rates(std::span(&r, 1), halves).rates;
    for (std::size_t j = 0; j < rates.n_neurons(); ++j) {
      total[*r.label] += rates.total(j);
      first[*r.label] += rates.counts(j, 0);
    }
  }
  CHECK(std::abs(total[0] - total[1]) / total[1] < 0.02);
  CHECK(first[0] >= 3.0 * first[1]);

  o.n_per_class = 3;
  CHECK(synthetic_temporal(o) == synthetic_temporal(o));
  auto other = o;
  other.seed = 78;
  CHECK_FALSE(synthetic_temporal(o) == synthetic_temporal(other));
}

TEST_CASE("model files") {
  SUBCASE("trained network round-trips") {
    NetworkOptions no;
    no.w_inh_exc = 17.0;
    TrainedMember m{build_diehl_cook(784, 100, no, 3), {}, {}, 3};
    std::vector<LabeledImage> data(4);
    for (int i = 0; i < 4; ++i) {
      data[i].label = i % 2;
      for (std::size_t p = 0; p < kImagePixels; ++p) data[i].pixels[p] = static_cast<std::uint8_t>((p * (i + 3)) % 256);
    }
    EncodeOptions eo;
    train_unsupervised(m.network, data, 1, eo);
    const auto a = assign_classes(m.network, data, 2, eo);
    m.populations = a.populations;
    m.silent_neurons = a.silent_neurons;
    const auto p = scratch("member.model.json");
    save_model(p, m);
    CHECK(load_member(p) == m);
  }
  SUBCASE("empty network round-trips") {
    const auto p = scratch("empty.model.json");
    save_model(p, TrainedMember{});
    CHECK(load_member(p) == TrainedMember{});
  }
  SUBCASE("bayes and pv models round-trip") {
    BayesModel b(3, 2, 4, 10.0);
    for (std::size_t i = 0; i < b.values().size(); ++i) b.values()[i] = 0.1 * static_cast<double>(i) + 1e-6;
    b.priors = {{0.3, 0.7}};
    const auto pb = scratch("bayes.model.json");
    save_model(pb, b);
    CHECK(load_bayes(pb) == b);

    const PvModel pv{testing::matrix({{1.5, 0.0}, {0.0, 0.0}}), {1}};
    const auto pp = scratch("pv.model.json");
    save_model(pp, pv);
    CHECK(load_pv(pp) == pv);
    CHECK_THROWS_AS(load_bayes(pp), FormatError);  // wrong kind
  }
  SUBCASE("version mismatch and corruption") {
    const auto p = scratch("v.model.json");
    save_model(p, PvModel{testing::matrix({{1.0}}), {}});
    std::ifstream in(p);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    in.close();
    const auto pos = text.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    std::ofstream(p) << std::string(text).replace(pos, 11, "\"version\":2");
    CHECK_THROWS_AS(load_pv(p), FormatError);
    std::ofstream(p) << text.substr(0, text.size() / 2);
    CHECK_THROWS_AS(load_pv(p), FormatError);
  }
}
