// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hvacdr {

// Exit codes used by the command-line tool map onto these categories.
enum class error_kind {
  config,
  input,
  io,
  infeasible,
  training_diverged,
  selection_failed,
  numerical,
};

class error : public std::runtime_error {
 public:
  error(error_kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  error_kind kind() const noexcept { return kind_; }

 private:
  error_kind kind_;
};

struct config_error : error {
  explicit config_error(const std::string& what) : error(error_kind::config, what) {}
};

struct input_error : error {
  explicit input_error(const std::string& what) : error(error_kind::input, what) {}
};

struct io_error : error {
  explicit io_error(const std::string& what) : error(error_kind::io, what) {}
};

struct numerical_error : error {
  explicit numerical_error(const std::string& what) : error(error_kind::numerical, what) {}
};

struct training_diverged : error {
  training_diverged(const std::string& what, int epoch)
      : error(error_kind::training_diverged, what), epoch(epoch) {}
  int epoch;
};

struct selection_failed : error {
  selection_failed(const std::string& what, double best_nmse)
      : error(error_kind::selection_failed, what), best_nmse(best_nmse) {}
  double best_nmse;
};

// Carries the names of the rows that certify infeasibility.
struct infeasible_error : error {
  infeasible_error(const std::string& what, std::vector<std::string> rows)
      : error(error_kind::infeasible, what), rows(std::move(rows)) {}
  std::vector<std::string> rows;
};

}  // namespace hvacdr
