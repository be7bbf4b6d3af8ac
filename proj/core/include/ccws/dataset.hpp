#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ccws/sparse_vector.hpp"

namespace ccws {

struct User {
  std::string id;
  SparseVector vector;
};

/// n users sharing one dimensionality d. User ids are unique.
class Dataset {
 public:
  explicit Dataset(std::uint64_t dimensionality = 0) : d_(dimensionality) {}

  /// Throws InvalidArgumentError on a duplicate id or mismatched
  /// dimensionality.
  void add(std::string id, SparseVector vector);

  std::uint64_t dimensionality() const noexcept { return d_; }
  std::size_t size() const noexcept { return users_.size(); }
  bool empty() const noexcept { return users_.empty(); }

  const std::vector<User>& users() const noexcept { return users_; }
  const User& operator[](std::size_t i) const { return users_[i]; }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws LookupError for unknown ids.
  std::size_t index_of(std::string_view id) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    if (a.d_ != b.d_ || a.users_.size() != b.users_.size()) return false;
    for (std::size_t i = 0; i < a.users_.size(); ++i) {
      if (a.users_[i].id != b.users_[i].id || a.users_[i].vector != b.users_[i].vector) {
        return false;
      }
    }
    return true;
  }

 private:
  std::uint64_t d_;
  std::vector<User> users_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Text format:
//   #d <dimensionality>
//   user_id<TAB>idx:weight idx:weight ...
// Blank lines and other '#'-prefixed lines are ignored. Weights are written
// in shortest round-trip form, so store followed by load is exact.

Dataset parse_dataset(std::istream& in);
void write_dataset(const Dataset& dataset, std::ostream& out);

/// Throws IoError if the file cannot be opened, ParseError on bad content.
Dataset load_dataset(const std::filesystem::path& path);
void store_dataset(const Dataset& dataset, const std::filesystem::path& path);

namespace detail {
/// Shortest decimal that parses back to exactly `value`.
std::string format_double(double value);
/// Strict full-token parse; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view token);
std::optional<std::uint64_t> parse_u64(std::string_view token);
}  // namespace detail

}  // namespace ccws
