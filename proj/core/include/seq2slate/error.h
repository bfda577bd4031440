#ifndef SEQ2SLATE_ERROR_H_
#define SEQ2SLATE_ERROR_H_

#include <stdexcept>
#include <string>

namespace seq2slate {

// Malformed input files, shape mismatches, bad configuration values.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or other numeric breakdowns detected at runtime.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace seq2slate

#endif  // SEQ2SLATE_ERROR_H_
