#pragma once

#include <stdexcept>
#include <string>

namespace lodopab {

/// Violated precondition, invalid configuration or inconsistent inputs.
/// Maps to CLI exit code 1.
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

/// Failure while ingesting a source slice; carries the slice name.
class IngestError : public ContractError {
 public:
  IngestError(const std::string& slice, const std::string& what)
      : ContractError("ingest error [" + slice + "]: " + what) {}
};

/// Filesystem / storage failure. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lodopab
