// Copyright 2026 The opaldp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPALDP_ERROR_HPP_
#define OPALDP_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace opaldp {

enum class ErrorCode {
  kInvalidArgument,
  kValidation,
  kInfeasible,
  kBudgetExceeded,
  kNoData,
  kIo,
  kDataLoss,
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid argument";
    case ErrorCode::kValidation:
      return "validation error";
    case ErrorCode::kInfeasible:
      return "infeasible";
    case ErrorCode::kBudgetExceeded:
      return "budget exceeded";
    case ErrorCode::kNoData:
      return "no data";
    case ErrorCode::kIo:
      return "i/o error";
    case ErrorCode::kDataLoss:
      return "data loss";
  }
  return "unknown";
}

// Base of every exception thrown by the library. The code is what the
// command-line front end maps onto its exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& message)
      : Error(ErrorCode::kInvalidArgument, message) {}
};

// A row of input data that does not conform to its schema. Row numbers are
// 1-based and count the header line, so they match what an editor shows.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& message, std::int64_t row = 0,
                  std::string column = {})
      : Error(ErrorCode::kValidation, Describe(message, row, column)),
        row_(row),
        column_(std::move(column)) {}

  std::int64_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  static std::string Describe(const std::string& message, std::int64_t row,
                              const std::string& column) {
    std::string out;
    if (row > 0) out += "row " + std::to_string(row) + ": ";
    if (!column.empty()) out += "column '" + column + "': ";
    return out + message;
  }

  std::int64_t row_;
  std::string column_;
};

// Raised when a mechanism would have to touch more domain cells than the
// configured cap allows.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& message, std::uint64_t cell_count,
                  std::uint64_t cap)
      : Error(ErrorCode::kInfeasible, message),
        cell_count_(cell_count),
        cap_(cap) {}

  std::uint64_t cell_count() const { return cell_count_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t cell_count_;
  std::uint64_t cap_;
};

class BudgetExceededError : public Error {
 public:
  BudgetExceededError(const std::string& message, double epsilon_total,
                      double delta_total)
      : Error(ErrorCode::kBudgetExceeded, message),
        epsilon_total_(epsilon_total),
        delta_total_(delta_total) {}

  double epsilon_total() const { return epsilon_total_; }
  double delta_total() const { return delta_total_; }

 private:
  double epsilon_total_;
  double delta_total_;
};

class NoDataError : public Error {
 public:
  explicit NoDataError(const std::string& message)
      : Error(ErrorCode::kNoData, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorCode::kIo, message) {}
};

// Integrity failure: a file no longer matches the digest recorded for it.
class DataLossError : public Error {
 public:
  explicit DataLossError(const std::string& message)
      : Error(ErrorCode::kDataLoss, message) {}
};

}  // namespace opaldp

#endif  // OPALDP_ERROR_HPP_
