#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "tsum/errors.hpp"
#include "tsum/features.hpp"

using namespace tsum;

namespace {

FeatureLayout layout2222() {
  FeatureLayout l;
  l.word_dim = 2;
  l.pos_dim = 2;
  l.tf_dim = 2;
  l.idf_dim = 2;
  return l;
}

}  // namespace

TEST(OneHot, Examples) {
  EXPECT_EQ(one_hot(0, 3), (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(one_hot(2, 3), (std::vector<double>{0, 0, 1}));
  for (std::size_t n = 1; n < 8; ++n)
    for (std::size_t i = 0; i < n; ++i) {
      auto v = one_hot(i, n);
      EXPECT_EQ(std::accumulate(v.begin(), v.end(), 0.0), 1.0);
    }
  EXPECT_THROW(one_hot(3, 3), ContractViolation);
}

TEST(Assemble, HandExample) {
  std::vector<double> emb{.5, .5};
  auto v = assemble_fre_vector(emb, {1, 0, 1}, layout2222());
  EXPECT_EQ(v, (std::vector<double>{.5, .5, 0, 1, 1, 0, 0, 1}));
}

TEST(Assemble, FitToHiddenShrinksWordSpan) {
  auto l = FeatureLayout::fit_to_hidden(512, 10, 10);
  EXPECT_EQ(l.word_dim, 480u);
  EXPECT_EQ(l.concat_dim(), 512u);
  EXPECT_EQ(l.pos_dim, 12u);
  EXPECT_THROW(FeatureLayout::fit_to_hidden(32, 10, 10), ConfigError);
}

TEST(Assemble, ZeroEmbeddingOnlyOneHotsNonzero) {
  auto l = FeatureLayout::with_word_dim(5, 4, 3);
  auto v = assemble_fre_vector(std::vector<double>(5, 0.0), {7, 2, 1}, l);
  ASSERT_EQ(v.size(), l.concat_dim());
  for (std::size_t i = 0; i < l.word_dim; ++i) EXPECT_EQ(v[i], 0.0);
  EXPECT_EQ(std::accumulate(v.begin(), v.end(), 0.0), 3.0);
}

TEST(Assemble, SpanPurityOnRandomInputs) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  auto l = FeatureLayout::with_word_dim(6, 5, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> emb(6);
    for (auto& x : emb) x = g(rng);
    TokenFeatures f{rng() % kNumPosTags, rng() % 5, rng() % 4};
    auto v = assemble_fre_vector(emb, f, l);
    for (auto [off, len, idx] : {std::tuple{l.pos_offset(), l.pos_dim, f.pos}, std::tuple{l.tf_offset(), l.tf_dim, f.tf_bin},
                                 std::tuple{l.idf_offset(), l.idf_dim, f.idf_bin}}) {
      int ones = 0;
      for (std::size_t i = 0; i < len; ++i) {
        EXPECT_TRUE(v[off + i] == 0.0 || v[off + i] == 1.0);
        ones += v[off + i] == 1.0;
      }
      EXPECT_EQ(ones, 1);
      EXPECT_EQ(v[off + idx], 1.0);
    }
  }
}

TEST(Assemble, DimensionMismatchIsContractViolation) {
  EXPECT_THROW(assemble_fre_vector(std::vector<double>{1.0}, {0, 0, 0}, layout2222()), ContractViolation);
  EXPECT_THROW(assemble_fre_vector(std::vector<double>{1, 1}, {2, 0, 0}, layout2222()), ContractViolation);
  EXPECT_THROW(assemble_fre_vector(std::vector<double>{1, 1}, {0, 0, 2}, layout2222()), ContractViolation);
}

TEST(Assemble, RowsMatchPerTokenVectors) {
  auto l = FeatureLayout::with_word_dim(3, 2, 2);
  Matrix words(2, 3);
  for (std::size_t i = 0; i < words.size(); ++i) words.data()[i] = 0.1 * static_cast<double>(i);
  std::vector<TokenFeatures> f{{1, 0, 1}, {4, 1, 0}};
  auto rows = assemble_fre_rows(words, f, l);
  for (std::size_t t = 0; t < 2; ++t) {
    auto v = assemble_fre_vector(words.row(t), f[t], l);
    for (std::size_t j = 0; j < v.size(); ++j) EXPECT_EQ(rows(t, j), v[j]);
  }
}

TEST(Project, FitToHiddenIsIdentity) {
  FreFitToHidden v{layout2222()};
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_EQ(project_to_hidden(x, v), x);
  EXPECT_THROW(project_to_hidden(std::vector<double>{1, 2}, v), ContractViolation);
}

TEST(Project, IdentityMapLeavesInput) {
  FeatureLayout l = FeatureLayout::with_word_dim(1, 1, 1);
  l.pos_dim = 1;
  FreLinearMapToHidden v{l, 4};
  Matrix eye(4, 4);
  for (std::size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;
  std::vector<double> x{.3, -1, 2, 5};
  EXPECT_EQ(project_to_hidden(x, v, eye), x);
}

TEST(Project, OneRowHandExample) {
  FeatureLayout l;
  l.word_dim = 1;
  l.pos_dim = 1;
  l.tf_dim = 0;
  l.idf_dim = 0;
  FreLinearMapToHidden v{l, 2};
  Matrix map(2, 2);
  map(0, 0) = 2;
  map(0, 1) = 3;
  map(1, 0) = 5;
  map(1, 1) = 7;
  EXPECT_EQ(project_to_hidden(std::vector<double>{1, 0}, v, map), (std::vector<double>{2, 3}));
  EXPECT_THROW(project_to_hidden(std::vector<double>{1, 0, 0}, v, map), ContractViolation);
}

TEST(Project, LinearMapIsLinear) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  auto l = FeatureLayout::with_word_dim(8, 3, 3);
  FreLinearMapToHidden v{l, 5};
  Matrix map(l.concat_dim(), 5);
  for (std::size_t i = 0; i < map.size(); ++i) map.data()[i] = u(rng);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(l.concat_dim()), y(l.concat_dim()), mix(l.concat_dim());
    const double a = u(rng) * 3, b = u(rng) * 3;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
      mix[i] = a * x[i] + b * y[i];
    }
    auto px = project_to_hidden(x, v, map), py = project_to_hidden(y, v, map), pm = project_to_hidden(mix, v, map);
    ASSERT_EQ(pm.size(), 5u);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(pm[j], a * px[j] + b * py[j], 1e-9);
  }
}

TEST(Variant, NamesAndLayouts) {
  EXPECT_EQ(variant_name(SharedBpe{}), "shared-bpe");
  EXPECT_EQ(variant_name(SeparateWord{}), "separate-word");
  EXPECT_EQ(feature_layout(SeparateWord{}), nullptr);
  EmbeddingVariant f = FreLinearMapToHidden{FeatureLayout::with_word_dim(64, 10, 10), 64};
  ASSERT_NE(feature_layout(f), nullptr);
  EXPECT_EQ(feature_layout(f)->concat_dim(), 64u + 32u);
}
