#include "tsum/features.hpp"

#include <algorithm>

#include "tsum/errors.hpp"

namespace tsum {

namespace {

void check_features(const TokenFeatures& f, const FeatureLayout& layout) {
  require(f.pos < layout.pos_dim, "POS index " + std::to_string(f.pos) + " outside span of " +
                                      std::to_string(layout.pos_dim));
  require(f.tf_bin < layout.tf_dim, "TF bin " + std::to_string(f.tf_bin) + " outside span of " +
                                        std::to_string(layout.tf_dim));
  require(f.idf_bin < layout.idf_dim, "IDF bin " + std::to_string(f.idf_bin) + " outside span of " +
                                          std::to_string(layout.idf_dim));
}

}  // namespace

FeatureLayout FeatureLayout::fit_to_hidden(std::size_t hidden, std::size_t n_tf_bins, std::size_t n_idf_bins) {
  const std::size_t features = kNumPosTags + n_tf_bins + n_idf_bins;
  if (hidden <= features)
    throw ConfigError("fit-to-hidden needs d_model > " + std::to_string(features) +
                      " (POS + TF + IDF one-hot spans); got " + std::to_string(hidden));
  return with_word_dim(hidden - features, n_tf_bins, n_idf_bins);
}

FeatureLayout FeatureLayout::with_word_dim(std::size_t word_dim, std::size_t n_tf_bins, std::size_t n_idf_bins) {
  if (word_dim == 0 || n_tf_bins == 0 || n_idf_bins == 0)
    throw ConfigError("feature layout spans must be non-empty");
  FeatureLayout l;
  l.word_dim = word_dim;
  l.tf_dim = n_tf_bins;
  l.idf_dim = n_idf_bins;
  return l;
}

std::string variant_name(const EmbeddingVariant& v) {
  struct {
    std::string operator()(const SharedBpe&) const { return "shared-bpe"; }
    std::string operator()(const SeparateWord&) const { return "separate-word"; }
    std::string operator()(const FreFitToHidden&) const { return "fre-fit-to-hidden"; }
    std::string operator()(const FreLinearMapToHidden&) const { return "fre-linear-map-to-hidden"; }
  } visitor;
  return std::visit(visitor, v);
}

const FeatureLayout* feature_layout(const EmbeddingVariant& v) {
  if (auto* f = std::get_if<FreFitToHidden>(&v)) return &f->layout;
  if (auto* f = std::get_if<FreLinearMapToHidden>(&v)) return &f->layout;
  return nullptr;
}

std::vector<double> one_hot(std::size_t index, std::size_t size) {
  require(index < size, "one_hot index " + std::to_string(index) + " out of range for size " + std::to_string(size));
  std::vector<double> v(size, 0.0);
  v[index] = 1.0;
  return v;
}

std::vector<double> assemble_fre_vector(std::span<const double> word_emb, const TokenFeatures& features,
                                        const FeatureLayout& layout) {
  require(word_emb.size() == layout.word_dim, "word embedding has length " + std::to_string(word_emb.size()) +
                                                  ", layout expects " + std::to_string(layout.word_dim));
  check_features(features, layout);
  std::vector<double> out(layout.concat_dim(), 0.0);
  std::copy(word_emb.begin(), word_emb.end(), out.begin());
  out[layout.pos_offset() + features.pos] = 1.0;
  out[layout.tf_offset() + features.tf_bin] = 1.0;
  out[layout.idf_offset() + features.idf_bin] = 1.0;
  return out;
}

Matrix assemble_fre_rows(const Matrix& word_rows, std::span<const TokenFeatures> features,
                         const FeatureLayout& layout) {
  require(word_rows.cols() == layout.word_dim && word_rows.rows() == features.size(),
          "assemble_fre_rows: word rows do not match the layout or feature count");
  Matrix out(word_rows.rows(), layout.concat_dim());
  for (std::size_t t = 0; t < word_rows.rows(); ++t) {
    check_features(features[t], layout);
    std::copy_n(word_rows.row(t).data(), layout.word_dim, out.row(t).data());
    out(t, layout.pos_offset() + features[t].pos) = 1.0;
    out(t, layout.tf_offset() + features[t].tf_bin) = 1.0;
    out(t, layout.idf_offset() + features[t].idf_bin) = 1.0;
  }
  return out;
}

std::vector<double> project_to_hidden(std::span<const double> concat, const FreFitToHidden& variant) {
  require(concat.size() == variant.layout.concat_dim(), "fit-to-hidden input has length " +
                                                            std::to_string(concat.size()) + ", expected " +
                                                            std::to_string(variant.layout.concat_dim()));
  return {concat.begin(), concat.end()};
}

std::vector<double> project_to_hidden(std::span<const double> concat, const FreLinearMapToHidden& variant,
                                      const Matrix& map) {
  require(concat.size() == variant.layout.concat_dim(), "linear-map input has length " +
                                                            std::to_string(concat.size()) + ", expected " +
                                                            std::to_string(variant.layout.concat_dim()));
  require(map.rows() == variant.layout.concat_dim() && map.cols() == variant.hidden,
          "linear map must be concat_dim x hidden");
  std::vector<double> out(variant.hidden, 0.0);
  for (std::size_t i = 0; i < concat.size(); ++i) {
    const double x = concat[i];
    if (x == 0.0) continue;
    for (std::size_t j = 0; j < variant.hidden; ++j) out[j] += x * map(i, j);
  }
  return out;
}

}  // namespace tsum
