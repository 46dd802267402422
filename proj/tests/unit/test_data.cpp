// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "helpers.hpp"
#include "vstg/data/dataset.hpp"
#include "vstg/data/feature_file.hpp"
#include "vstg/data/protocol.hpp"
#include "vstg/data/synthetic.hpp"
#include "json.hpp"
#include "vstg/error.hpp"

using namespace vstg;
namespace fs = std::filesystem;

// ---- protocol ----

TEST(Protocol, ObservedStepsExamples) {
  const AnticipationProtocol p;
  EXPECT_EQ(p.observed_steps(5), 9u);
  EXPECT_EQ(p.observed_steps(8), 6u);
  EXPECT_EQ(p.observed_steps(1), 13u);
}

TEST(Protocol, AnticipationTimeExamples) {
  const AnticipationProtocol p;
  EXPECT_DOUBLE_EQ(p.anticipation_time(4), 1.0);
  EXPECT_DOUBLE_EQ(p.anticipation_time(8), 2.0);
  EXPECT_DOUBLE_EQ(p.anticipation_time(1), 0.25);
  EXPECT_EQ(p.selection_step(), 4u);
}

TEST(Protocol, Conservation) {
  for (std::size_t enc : {1u, 3u, 6u})
    for (std::size_t ant : {1u, 4u, 8u}) {
      const AnticipationProtocol p{enc, ant, 0.25};
      for (std::size_t n = 1; n <= ant; ++n) EXPECT_EQ(p.observed_steps(n) + n, enc + ant);
    }
}

TEST(Protocol, OutOfRangeStep) {
  const AnticipationProtocol p;
  EXPECT_THROW(p.observed_steps(0), ProtocolError);
  EXPECT_THROW(p.observed_steps(9), ProtocolError);
  EXPECT_THROW(p.anticipation_time(0), ProtocolError);
  EXPECT_THROW(p.anticipation_time(9), ProtocolError);
}

TEST(Protocol, InvalidConfig) {
  EXPECT_THROW((AnticipationProtocol{0, 8, 0.25}.validate()), ConfigError);
  EXPECT_THROW((AnticipationProtocol{6, 0, 0.25}.validate()), ConfigError);
  EXPECT_THROW((AnticipationProtocol{6, 8, 0.0}.validate()), ConfigError);
}

TEST(Protocol, ObservedWindowKeepsEarliestSteps) {
  const AnticipationProtocol p;
  Tensor stored({14, 2});
  for (std::size_t t = 0; t < 14; ++t) stored(t, 0) = static_cast<double>(t);
  for (std::size_t n = 1; n <= 8; ++n) {
    const Tensor w = observed_window(stored, p, n);
    ASSERT_EQ(w.rows(), 14 - n);
    for (std::size_t t = 0; t < w.rows(); ++t) EXPECT_EQ(w(t, 0), static_cast<double>(t));
  }
  EXPECT_THROW(observed_window(Tensor({13, 2}), p, 1), ProtocolError);
}

// ---- feature file ----

TEST(FeatureFile, RoundTrip7x1024) {
  Rng rng(3);
  Tensor t = rng.normal_tensor(7, 1024);
  round_to_float(t);
  const auto dir = vstg::testing::temp_dir("ff");
  write_feature_file(dir / "a.vstg", t);
  const Tensor back = read_feature_file(dir / "a.vstg");
  EXPECT_EQ(back, t);
  EXPECT_EQ(fs::file_size(dir / "a.vstg"), 16u + 7u * 1024u * 4u);
  EXPECT_EQ(encode_feature_file(back), encode_feature_file(t));
}

TEST(FeatureFile, HeaderLayout) {
  const auto bytes = encode_feature_file(Tensor::from_rows({{1.0, -2.0, 0.5}, {0.0, 3.0, 4.0}}));
  ASSERT_EQ(bytes.size(), 16u + 24u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "VSTG");
  auto u32 = [&](std::size_t off) {
    return static_cast<std::uint32_t>(bytes[off]) | (static_cast<std::uint32_t>(bytes[off + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes[off + 2]) << 16) | (static_cast<std::uint32_t>(bytes[off + 3]) << 24);
  };
  EXPECT_EQ(u32(4), 1u);
  EXPECT_EQ(u32(8), 2u);
  EXPECT_EQ(u32(12), 3u);
  // -2.0f is 0xC0000000, stored little-endian
  EXPECT_EQ(u32(20), 0xC0000000u);
}

TEST(FeatureFile, EmptyTensorIsHeaderOnly) {
  const auto bytes = encode_feature_file(Tensor({0, 0}));
  EXPECT_EQ(bytes.size(), kFeatureFileHeaderBytes);
  const Tensor back = decode_feature_file(bytes);
  EXPECT_EQ(back.rows(), 0u);
  EXPECT_EQ(back.cols(), 0u);
}

TEST(FeatureFile, TruncatedPayload) {
  auto bytes = encode_feature_file(Tensor::full(3, 4, 1.5));
  bytes.resize(bytes.size() - 6);
  try {
    decode_feature_file(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
  }
}

TEST(FeatureFile, BadMagicVersionAndTrailing) {
  const auto good = encode_feature_file(Tensor::full(2, 2, 1.0));
  auto bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_feature_file(bad), FormatError);
  bad = good;
  bad[4] = 2;
  EXPECT_THROW(decode_feature_file(bad), FormatError);
  bad = good;
  bad.push_back(0);
  EXPECT_THROW(decode_feature_file(bad), FormatError);
  EXPECT_THROW(decode_feature_file(std::span<const std::uint8_t>(good.data(), 10)), FormatError);
}

TEST(FeatureFile, NonFiniteRejectedOnWrite) {
  Tensor t = Tensor::zeros(1, 2);
  t(0, 1) = NAN;
  EXPECT_THROW(encode_feature_file(t), FormatError);
}

TEST(FeatureFile, RandomShapesRoundTrip) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const std::size_t r = rng.below(20), c = rng.below(40);
    Tensor t = rng.normal_tensor(r, c, 10.0);
    round_to_float(t);
    const auto bytes = encode_feature_file(t);
    const Tensor back = decode_feature_file(bytes);
    ASSERT_EQ(back.rows(), r);
    ASSERT_EQ(back.cols(), c);
    EXPECT_EQ(back.storage(), t.storage());
    EXPECT_EQ(encode_feature_file(back), bytes);
  }
}

// ---- dataset ----

namespace {

SynthConfig small_synth(std::uint64_t seed = 0) {
  SynthConfig c;
  c.n_classes = 6;
  c.d_v = 5;
  c.d_s = 4;
  c.n_train = 30;
  c.n_val = 12;
  c.seed = seed;
  return c;
}

void expect_same_dataset(const Dataset& a, const Dataset& b) {
  EXPECT_EQ(a.d_v, b.d_v);
  EXPECT_EQ(a.modalities, b.modalities);
  EXPECT_EQ(a.semantic.tensor(), b.semantic.tensor());
  EXPECT_EQ(a.semantic.class_names(), b.semantic.class_names());
  EXPECT_EQ(a.taxonomy.verb_of, b.taxonomy.verb_of);
  EXPECT_EQ(a.taxonomy.noun_of, b.taxonomy.noun_of);
  ASSERT_EQ(a.splits.size(), b.splits.size());
  for (const auto& [name, samples] : a.splits) {
    const auto& other = b.split(name);
    ASSERT_EQ(samples.size(), other.size()) << name;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      EXPECT_EQ(samples[i].segment_id, other[i].segment_id);
      EXPECT_EQ(samples[i].obs_label, other[i].obs_label);
      EXPECT_EQ(samples[i].target_label, other[i].target_label);
      EXPECT_EQ(samples[i].verb_id, other[i].verb_id);
      EXPECT_EQ(samples[i].noun_id, other[i].noun_id);
      EXPECT_EQ(samples[i].target_start_s, other[i].target_start_s);
      for (const auto& mod : a.modalities)
        EXPECT_EQ(samples[i].modality(mod).steps, other[i].modality(mod).steps);
    }
  }
}

}  // namespace

TEST(Dataset, SaveLoadRoundTrip) {
  auto cfg = small_synth();
  cfg.modalities = {"rgb", "flow"};
  const auto syn = generate_synthetic(cfg);
  const auto dir = vstg::testing::temp_dir("ds");
  save_dataset(syn.data, dir);
  LoadReport report;
  const Dataset back = load_dataset(dir, &report);
  expect_same_dataset(syn.data, back);
  EXPECT_EQ(report.rejected_short.at("train"), 0u);
  EXPECT_EQ(nlohmann::json::parse(back.meta_json), nlohmann::json::parse(syn.data.meta_json));
}

TEST(Dataset, ShortWindowsRejectedAndCounted) {
  const auto syn = generate_synthetic(small_synth());
  const auto dir = vstg::testing::temp_dir("ds_short");
  save_dataset(syn.data, dir);
  const auto& victim = syn.data.split("train")[3];
  write_feature_file(dir / "features" / "train" / (victim.segment_id + ".rgb.vstg"),
                     victim.modality("rgb").steps.slice_rows(0, 10));
  LoadReport report;
  const Dataset back = load_dataset(dir, &report);
  EXPECT_EQ(report.rejected_short.at("train"), 1u);
  EXPECT_EQ(report.rejected_short.at("val"), 0u);
  EXPECT_EQ(back.split("train").size(), syn.data.split("train").size() - 1);
  for (const auto& s : back.split("train")) EXPECT_NE(s.segment_id, victim.segment_id);
}

TEST(Dataset, ValidateRejectsBadLabel) {
  auto syn = generate_synthetic(small_synth());
  syn.data.splits["train"][0].target_label = 6;
  EXPECT_THROW(syn.data.validate(), IndexError);
}

TEST(Dataset, MissingSplitAndModality) {
  const auto syn = generate_synthetic(small_synth());
  EXPECT_THROW(syn.data.split("nope"), Error);
  EXPECT_THROW(syn.data.split("train")[0].modality("flow"), Error);
}

TEST(Dataset, MissingManifestIsFormatError) {
  const auto dir = vstg::testing::temp_dir("ds_missing");
  EXPECT_THROW(load_dataset(dir), FormatError);
}

// ---- synthetic ----

TEST(Synthetic, SameSeedIdentical) {
  const auto a = generate_synthetic(small_synth(7));
  const auto b = generate_synthetic(small_synth(7));
  expect_same_dataset(a.data, b.data);
  EXPECT_EQ(a.data.meta_json, b.data.meta_json);
  const auto da = vstg::testing::temp_dir("syn_a"), db = vstg::testing::temp_dir("syn_b");
  save_dataset(a.data, da);
  save_dataset(b.data, db);
  for (const auto& entry : fs::recursive_directory_iterator(da)) {
    if (!entry.is_regular_file()) continue;
    const auto other = db / fs::relative(entry.path(), da);
    std::ifstream x(entry.path(), std::ios::binary), y(other, std::ios::binary);
    const std::string bx((std::istreambuf_iterator<char>(x)), {}), by((std::istreambuf_iterator<char>(y)), {});
    EXPECT_EQ(bx, by) << entry.path();
  }
  const auto c = generate_synthetic(small_synth(8));
  EXPECT_NE(c.data.split("train")[0].modality("rgb").steps, a.data.split("train")[0].modality("rgb").steps);
}

TEST(Synthetic, ShapesAndLabels) {
  const auto syn = generate_synthetic(small_synth());
  EXPECT_EQ(syn.data.num_classes(), 6u);
  EXPECT_EQ(syn.data.semantic.dim(), 4u);
  EXPECT_EQ(syn.data.split("train").size(), 30u);
  EXPECT_EQ(syn.data.split("val").size(), 12u);
  for (const auto& s : syn.data.split("train")) {
    EXPECT_EQ(s.modality("rgb").length(), 14u);
    EXPECT_EQ(s.modality("rgb").dim(), 5u);
    EXPECT_LT(s.obs_label, 6u);
    EXPECT_LT(s.target_label, 6u);
  }
}

TEST(Synthetic, NoiselessLookupTableIsExact) {
  auto cfg = small_synth();
  cfg.noise_sigma = 0.0;
  cfg.n_train = 200;
  const auto syn = generate_synthetic(cfg);
  // Learn obs -> target from train, then predict val from features alone.
  std::vector<std::size_t> table(cfg.n_classes, cfg.n_classes);
  for (const auto& s : syn.data.split("train")) {
    EXPECT_EQ(s.target_label, syn.successor[s.obs_label]);
    table[s.obs_label] = s.target_label;
  }
  std::size_t correct = 0;
  const Tensor& protos = syn.prototypes.at("rgb");
  for (const auto& s : syn.data.split("val")) {
    const auto& f = s.modality("rgb").steps;
    std::size_t cls = cfg.n_classes;
    for (std::size_t c = 0; c < cfg.n_classes; ++c) {
      bool match = true;
      for (std::size_t j = 0; j < cfg.d_v; ++j) match = match && f(0, j) == protos(c, j);
      if (match) cls = c;
    }
    ASSERT_LT(cls, cfg.n_classes);
    correct += table[cls] == s.target_label;
  }
  EXPECT_EQ(correct, syn.data.split("val").size());
  EXPECT_DOUBLE_EQ(syn.bayes_ceiling_top1, 1.0);
}

TEST(Synthetic, LambdaZeroMakesSemanticRowsIdentical) {
  auto cfg = small_synth();
  cfg.informativeness = 0.0;
  const auto syn = generate_synthetic(cfg);
  const Tensor& s = syn.data.semantic.tensor();
  for (std::size_t c = 1; c < s.rows(); ++c)
    for (std::size_t j = 0; j < s.cols(); ++j) EXPECT_EQ(s(c, j), s(0, j));
}

TEST(Synthetic, TargetDistributionRule) {
  auto cfg = small_synth();
  cfg.informativeness = 0.4;
  const Tensor m = Tensor::identity(6);
  for (std::size_t c = 0; c < 6; ++c) {
    const auto p = target_distribution(cfg, m, c);
    for (std::size_t t = 0; t < 6; ++t) EXPECT_NEAR(p[t], (t == c ? 0.4 : 0.0) + 0.6 / 6.0, 1e-15);
  }
}

TEST(Synthetic, LabelMarginalsWithinBinomialBounds) {
  SynthConfig cfg;
  cfg.n_classes = 4;
  cfg.d_v = 2;
  cfg.d_s = 2;
  cfg.informativeness = 0.5;
  cfg.n_train = 8000;
  cfg.n_val = 10;
  cfg.seed = 5;
  const auto syn = generate_synthetic(cfg);
  std::vector<std::vector<double>> counts(4, std::vector<double>(4, 0.0));
  std::vector<double> obs(4, 0.0);
  for (const auto& s : syn.data.split("train")) {
    counts[s.obs_label][s.target_label] += 1.0;
    obs[s.obs_label] += 1.0;
  }
  for (std::size_t c = 0; c < 4; ++c) {
    const double pc = 0.25, n = 8000.0;
    EXPECT_LT(std::abs(obs[c] - n * pc), 4.0 * std::sqrt(n * pc * (1 - pc))) << "obs class " << c;
    const auto p = target_distribution(cfg, syn.transition, c);
    for (std::size_t t = 0; t < 4; ++t) {
      const double sd = std::sqrt(obs[c] * p[t] * (1 - p[t]));
      EXPECT_LT(std::abs(counts[c][t] - obs[c] * p[t]), 4.0 * sd) << c << "->" << t;
    }
  }
}

TEST(Synthetic, LambdaZeroTargetIndependentOfObs) {
  SynthConfig cfg;
  cfg.n_classes = 3;
  cfg.informativeness = 0.0;
  cfg.d_v = 2;
  cfg.d_s = 2;
  const auto syn = generate_synthetic(cfg);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto p = target_distribution(cfg, syn.transition, c);
    for (double v : p) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  }
}

TEST(Synthetic, CustomMarkovMatrix) {
  auto cfg = small_synth();
  cfg.n_classes = 2;
  cfg.transition = Tensor::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  const auto syn = generate_synthetic(cfg);
  EXPECT_EQ(syn.successor, (std::vector<std::size_t>{1, 0}));
  for (const auto& s : syn.data.split("train")) EXPECT_EQ(s.target_label, 1 - s.obs_label);
  cfg.transition = Tensor::from_rows({{0.5, 0.4}, {1.0, 0.0}});
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
}

TEST(Synthetic, InvalidConfig) {
  auto cfg = small_synth();
  cfg.n_classes = 1;
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
  cfg = small_synth();
  cfg.informativeness = 1.5;
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
  cfg = small_synth();
  cfg.noise_sigma = -1.0;
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
}

// Brute-force posterior over classes from the full per-step Gaussian
// likelihood of the observed window (not the window mean).
TEST(Synthetic, BayesCeilingMatchesBruteForceOracle) {
  SynthConfig cfg;
  cfg.n_classes = 20;
  cfg.d_v = 8;
  cfg.d_s = 4;
  cfg.noise_sigma = 0.5;
  cfg.informativeness = 1.0;
  cfg.n_train = 10;
  cfg.n_val = 300;
  cfg.seed = 2;
  const auto syn = generate_synthetic(cfg);
  const Tensor& protos = syn.prototypes.at("rgb");
  const std::size_t n = cfg.protocol.selection_step();
  double total = 0.0;
  for (const auto& s : syn.data.split("val")) {
    const Tensor& f = s.modality("rgb").steps;
    const std::size_t keep = cfg.protocol.total_steps() - n;
    std::vector<long double> ll(cfg.n_classes, 0.0L);
    for (std::size_t c = 0; c < cfg.n_classes; ++c)
      for (std::size_t t = 0; t < keep; ++t)
        for (std::size_t j = 0; j < cfg.d_v; ++j) {
          const long double d = f(t, j) - protos(c, j);
          ll[c] -= d * d / (2.0L * 0.25L);
        }
    const long double mx = *std::max_element(ll.begin(), ll.end());
    long double z = 0.0L;
    for (auto& v : ll) z += (v = std::exp(v - mx));
    std::vector<long double> target(cfg.n_classes, 0.0L);
    for (std::size_t c = 0; c < cfg.n_classes; ++c) target[syn.successor[c]] += ll[c] / z;
    total += static_cast<double>(*std::max_element(target.begin(), target.end()));
  }
  const double oracle = total / static_cast<double>(cfg.n_val);
  EXPECT_NEAR(syn.bayes_ceiling_top1, oracle, 1e-9);
  EXPECT_GT(oracle, 0.0);
  EXPECT_LE(oracle, 1.0);
  const auto meta = nlohmann::json::parse(syn.data.meta_json);
  EXPECT_TRUE(meta.contains("bayes_ceiling_top1_val")) << meta.dump();
}
