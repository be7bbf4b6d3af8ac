#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccws/dataset.hpp"
#include "ccws/digest.hpp"
#include "ccws/hashers.hpp"

namespace ccws {

/// A group of users sharing one identity. `members` are dataset indices in
/// ascending order; `id` is SHA-256 over the members' user ids sorted
/// lexicographically and joined with '\n'.
struct Cohort {
  Digest id{};
  std::vector<std::size_t> members;

  std::size_t size() const noexcept { return members.size(); }
};

/// Parameters recorded with an assignment (written to the metadata file).
struct AssignmentParams {
  std::string method;  // ccws | cws | minhash | signrp | random
  std::size_t k = 20;
  std::size_t max_iterations = 0;  // T; 0 when the builder has no iterations
  double p = 1.0;
  std::size_t m = 0;  // hash-vector length; 0 for ccws/random
  std::uint64_t experiment_seed = 42;
  std::string cws_bits = "0";
};

struct CohortAssignment {
  std::vector<Cohort> cohorts;
  AssignmentParams params;
  std::size_t iterations_used = 0;
  std::size_t peak_cohorts = 0;
  /// Size of the user universe the cohorts should partition.
  std::size_t user_count = 0;
};

/// Builds the cohort for `members` (any order, no duplicates expected).
Cohort make_cohort(const Dataset& dataset, std::vector<std::size_t> members);

// ---------------------------------------------------------------------------
// Consecutive CWS

struct CcwsIterationStats {
  std::size_t iteration = 0;
  std::size_t cohorts = 0;          // total after this iteration's commit
  std::size_t active_cohorts = 0;   // cohorts hashed this iteration (size >= 2K)
  std::size_t active_users = 0;
  std::size_t splits = 0;
};

struct CcwsParams {
  double p = 1.0;
  std::size_t max_iterations = 1000;
  std::size_t k = 20;
  std::uint64_t experiment_seed = 42;
  /// Stop after this many consecutive iterations without a split.
  std::size_t stall_limit = 32;
  /// Optional per-dimension multipliers applied to every user before
  /// hashing; empty means none.
  std::vector<double> feature_importance;
  /// Called once per executed iteration after the commit phase.
  std::function<void(const CcwsIterationStats&)> on_iteration;
};

/// Seed used for the cohort created with `ordinal` at `iteration`.
std::uint64_t ccws_sample_seed(std::uint64_t experiment_seed, std::uint64_t iteration,
                               std::uint64_t ordinal) noexcept;

/// Starting from one cohort holding every user, repeatedly hashes each cohort
/// of size >= 2K with a fresh 0-bit CWS sample and splits off the users
/// sharing the most frequent hash value, but only when both parts keep at
/// least K members. Throws InfeasibleError when n < K.
CohortAssignment build_ccws(const Dataset& dataset, const CcwsParams& params);

// ---------------------------------------------------------------------------
// Baselines

/// Sorts users by their hash vectors (ties by user id) and cuts consecutive
/// groups of K; the tail of fewer than K users joins the last group.
CohortAssignment build_hash_and_sort(const Dataset& dataset, const HashMethod& method,
                                     std::size_t m, std::size_t k,
                                     std::uint64_t experiment_seed);

/// Uniform random assignment into max(1, floor(n / 2K)) buckets; buckets
/// smaller than K are dissolved round-robin into the others.
CohortAssignment build_random(const Dataset& dataset, std::size_t k,
                              std::uint64_t experiment_seed);

// ---------------------------------------------------------------------------
// Inspection

/// Element-wise mean of the members' vectors, implicit zeros included.
/// Throws LookupError for a member index outside the dataset and
/// InvalidArgumentError for an empty cohort.
SparseVector cohort_identity(const Cohort& cohort, const Dataset& dataset);

struct KAnonymityReport {
  bool ok = true;
  /// Cohorts smaller than K or containing a user that appears elsewhere.
  std::vector<Digest> violations;
  std::size_t duplicated_users = 0;
  std::size_t missing_users = 0;
};

KAnonymityReport verify_k_anonymity(const CohortAssignment& assignment, std::size_t k);

struct SizeBucket {
  std::size_t size = 0;
  std::size_t count = 0;
  double cumulative_fraction = 0.0;
};

std::vector<SizeBucket> size_distribution(const CohortAssignment& assignment);

// ---------------------------------------------------------------------------
// Files
//
// Assignment: one line per user, `user_id<TAB>cohort_id_hex`, in dataset
// order. Metadata: `key=value` lines.

void write_assignment(const CohortAssignment& assignment, const Dataset& dataset,
                      std::ostream& out);
void write_metadata(const CohortAssignment& assignment, std::ostream& out);

/// Reads an assignment file. With a dataset, user ids are resolved against it
/// (unknown ids are a ParseError) and user_count = dataset size. Without
/// one, users are indexed in order of first appearance and their ids are
/// returned through `user_ids`.
CohortAssignment parse_assignment(std::istream& in, const Dataset* dataset,
                                  std::vector<std::string>* user_ids = nullptr);

void store_assignment(const CohortAssignment& assignment, const Dataset& dataset,
                      const std::filesystem::path& path);
CohortAssignment load_assignment(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace ccws
