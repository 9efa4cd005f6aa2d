#ifndef KNOWRA_COMMON_HPP
#define KNOWRA_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace knowra {

// Input could not be parsed (JSON syntax, unknown fields, bad types).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input parsed but violates a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal pipeline inconsistency (a bug, not a user error).
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

// Soft-failure counters threaded through the pipeline. Events that are
// tolerated (empty coref sets after provider failure, KB lookups that
// exhausted retries, degenerate attention overlaps) are counted here
// instead of aborting the run.
struct Counters {
  std::uint64_t coref_provider_failures = 0;
  std::uint64_t kb_lookup_failures = 0;
  std::uint64_t context_degeneracies = 0;
};

}  // namespace knowra

#endif  // KNOWRA_COMMON_HPP
