#include "tsum/model/params.hpp"

#include "tsum/errors.hpp"

namespace tsum {

std::size_t ParameterStore::add(std::string name, std::size_t rows, std::size_t cols, bool vocab_rows) {
  require(!index_.count(name), "duplicate parameter " + name);
  const std::size_t i = params_.size();
  index_.emplace(name, i);
  params_.push_back(
      {std::move(name), Matrix(rows, cols), Matrix(rows, cols), Matrix(rows, cols), Matrix(rows, cols), vocab_rows});
  return i;
}

std::optional<std::size_t> ParameterStore::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Parameter& ParameterStore::get(const std::string& name) {
  auto i = find(name);
  require(i.has_value(), "unknown parameter " + name);
  return params_[*i];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto i = find(name);
  require(i.has_value(), "unknown parameter " + name);
  return params_[*i];
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  for (const auto& p : params_) out.push_back(p.name);
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

}  // namespace tsum
