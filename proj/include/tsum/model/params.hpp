#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsum/tensor.hpp"

namespace tsum {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  // Adam first and second moments.
  Matrix m;
  Matrix v;
  // Rows indexed by decoder vocabulary ids; LVT restricts updates to them.
  bool vocab_rows = false;
};

// Named parameter tensors in creation order. Indices are stable.
class ParameterStore {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols, bool vocab_rows = false);

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  // Throws ContractViolation for an unknown name.
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  std::optional<std::size_t> find(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  std::vector<std::string> names() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace tsum
