#include "tsum/model/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "tsum/errors.hpp"

namespace tsum {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Summaries are never empty, so EOS cannot come first.
void forbid_specials(std::vector<double>& log_probs, bool first) {
  log_probs[kPadId] = kNegInf;
  log_probs[kBosId] = kNegInf;
  if (first) log_probs[kEosId] = kNegInf;
}

std::size_t effective_max_len(const Model& model, std::size_t max_len) {
  if (max_len < 1) throw ConfigError("max_len must be at least 1");
  return std::min(max_len, model.config().max_positions);
}

std::vector<TokenId> prefix_of(const std::vector<TokenId>& tokens) {
  std::vector<TokenId> p;
  p.reserve(tokens.size() + 1);
  p.push_back(kBosId);
  p.insert(p.end(), tokens.begin(), tokens.end());
  return p;
}

}  // namespace

void DecodeOptions::validate() const {
  if (max_len < 1) throw ConfigError("decoding max_len must be at least 1");
  if (beam_width < 1) throw ConfigError("beam_width must be at least 1");
}

DecodeStrategy parse_strategy(const std::string& name) {
  if (name == "greedy") return DecodeStrategy::Greedy;
  if (name == "beam") return DecodeStrategy::Beam;
  throw ConfigError("unknown decoding strategy '" + name + "' (expected greedy or beam)");
}

double Hypothesis::score() const {
  const std::size_t n = tokens.size() + (finished ? 1 : 0);
  return n == 0 ? log_prob : log_prob / static_cast<double>(n);
}

Hypothesis greedy_decode(const Example& source, const Model& model, std::size_t max_len) {
  max_len = effective_max_len(model, max_len);
  const Matrix memory = model.encode(source);
  Hypothesis h;
  while (h.tokens.size() < max_len) {
    auto lp = model.next_log_probs(memory, source.source, prefix_of(h.tokens));
    forbid_specials(lp, h.tokens.empty());
    const auto best = static_cast<TokenId>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    h.log_prob += lp[static_cast<std::size_t>(best)];
    if (best == kEosId) {
      h.finished = true;
      break;
    }
    h.tokens.push_back(best);
  }
  return h;
}

Hypothesis beam_decode(const Example& source, const Model& model, std::size_t width, std::size_t max_len) {
  if (width < 1) throw ConfigError("beam_width must be at least 1");
  max_len = effective_max_len(model, max_len);
  const Matrix memory = model.encode(source);

  std::vector<Hypothesis> live{Hypothesis{}};
  std::vector<Hypothesis> done;
  for (std::size_t t = 0; t < max_len && !live.empty() && done.size() < width; ++t) {
    // (log_prob, beam index, token): ordered by log_prob desc, then beam, then token.
    std::vector<std::tuple<double, std::size_t, TokenId>> cand;
    for (std::size_t b = 0; b < live.size(); ++b) {
      auto lp = model.next_log_probs(memory, source.source, prefix_of(live[b].tokens));
      forbid_specials(lp, live[b].tokens.empty());
      std::vector<TokenId> ids(lp.size());
      for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<TokenId>(i);
      const std::size_t k = std::min(width, ids.size());
      std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(), [&](TokenId a, TokenId c) {
        return lp[static_cast<std::size_t>(a)] != lp[static_cast<std::size_t>(c)]
                   ? lp[static_cast<std::size_t>(a)] > lp[static_cast<std::size_t>(c)]
                   : a < c;
      });
      for (std::size_t i = 0; i < k; ++i)
        cand.emplace_back(live[b].log_prob + lp[static_cast<std::size_t>(ids[i])], b, ids[i]);
    }
    std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
      return std::get<2>(a) < std::get<2>(b);
    });
    std::vector<Hypothesis> next;
    for (const auto& [lp, b, tok] : cand) {
      if (next.size() + done.size() >= width) break;
      if (lp == kNegInf) break;
      Hypothesis h = live[b];
      h.log_prob = lp;
      if (tok == kEosId) {
        h.finished = true;
        done.push_back(std::move(h));
      } else {
        h.tokens.push_back(tok);
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }

  std::vector<Hypothesis> pool = std::move(done);
  pool.insert(pool.end(), live.begin(), live.end());
  pool.push_back(greedy_decode(source, model, max_len));
  // First best wins, so beam results are preferred over the greedy
  // fallback on exact ties.
  const Hypothesis* best = &pool.front();
  for (const auto& h : pool)
    if (h.score() > best->score()) best = &h;
  return *best;
}

Hypothesis decode(const Example& source, const Model& model, const DecodeOptions& options) {
  options.validate();
  if (options.strategy == DecodeStrategy::Greedy) return greedy_decode(source, model, options.max_len);
  return beam_decode(source, model, options.beam_width, options.max_len);
}

double sequence_log_prob(const Example& source, const Model& model, std::span<const TokenId> tokens, bool finished) {
  const Matrix memory = model.encode(source);
  std::vector<TokenId> prefix{kBosId};
  double total = 0.0;
  for (std::size_t i = 0; i <= tokens.size(); ++i) {
    if (i == tokens.size() && !finished) break;
    auto lp = model.next_log_probs(memory, source.source, prefix);
    forbid_specials(lp, i == 0);
    const TokenId next = i < tokens.size() ? tokens[i] : kEosId;
    total += lp[static_cast<std::size_t>(next)];
    prefix.push_back(next);
  }
  return total;
}

}  // namespace tsum
