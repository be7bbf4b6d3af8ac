#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "ccws/cohorts.hpp"
#include "ccws/errors.hpp"

namespace ccws {

void write_assignment(const CohortAssignment& assignment, const Dataset& dataset,
                      std::ostream& out) {
  std::vector<const Cohort*> owner(dataset.size(), nullptr);
  for (const Cohort& c : assignment.cohorts) {
    for (std::size_t i : c.members) {
      if (i >= owner.size()) throw LookupError("assignment refers to a user outside the dataset");
      if (owner[i] != nullptr) throw PartitionError("user '" + dataset[i].id + "' is in two cohorts");
      owner[i] = &c;
    }
  }
  for (std::size_t i = 0; i < owner.size(); ++i) {
    if (owner[i] == nullptr) throw PartitionError("user '" + dataset[i].id + "' has no cohort");
    out << dataset[i].id << '\t' << to_hex(owner[i]->id) << '\n';
  }
}

void write_metadata(const CohortAssignment& a, std::ostream& out) {
  out << "method=" << a.params.method << '\n'
      << "K=" << a.params.k << '\n'
      << "T=" << a.params.max_iterations << '\n'
      << "p=" << detail::format_double(a.params.p) << '\n'
      << "m=" << a.params.m << '\n'
      << "experiment_seed=" << a.params.experiment_seed << '\n'
      << "cws_bits=" << a.params.cws_bits << '\n'
      << "iterations_used=" << a.iterations_used << '\n'
      << "cohorts=" << a.cohorts.size() << '\n'
      << "users=" << a.user_count << '\n';
}

CohortAssignment parse_assignment(std::istream& in, const Dataset* dataset,
                                  std::vector<std::string>* user_ids) {
  std::map<std::string, std::size_t> cohort_slot;
  std::map<std::string, std::size_t> local_index;
  std::vector<std::string> local_ids;
  CohortAssignment out;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw ParseError(line_no, "expected user_id<TAB>cohort_id");
    }
    const std::string id(line.substr(0, tab));
    const std::string hex(line.substr(tab + 1));
    Digest digest{};
    try {
      digest = digest_from_hex(hex);
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }

    std::size_t user = 0;
    if (dataset != nullptr) {
      const auto found = dataset->find(id);
      if (!found) throw ParseError(line_no, "unknown user id '" + id + "'");
      user = *found;
    } else {
      const auto [it, inserted] = local_index.emplace(id, local_ids.size());
      if (inserted) local_ids.push_back(id);
      user = it->second;
    }

    const auto [slot, fresh] = cohort_slot.emplace(hex, out.cohorts.size());
    if (fresh) out.cohorts.push_back(Cohort{digest, {}});
    out.cohorts[slot->second].members.push_back(user);
  }
  for (Cohort& c : out.cohorts) std::sort(c.members.begin(), c.members.end());
  out.user_count = dataset != nullptr ? dataset->size() : local_ids.size();
  out.peak_cohorts = out.cohorts.size();
  if (user_ids != nullptr) *user_ids = std::move(local_ids);
  return out;
}

void store_assignment(const CohortAssignment& assignment, const Dataset& dataset,
                      const std::filesystem::path& path) {
  {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write assignment '" + path.string() + "'");
    write_assignment(assignment, dataset, out);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }
  std::filesystem::path meta = path;
  meta += ".meta";
  std::ofstream out(meta);
  if (!out) throw IoError("cannot write metadata '" + meta.string() + "'");
  write_metadata(assignment, out);
}

CohortAssignment load_assignment(const std::filesystem::path& path, const Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open assignment '" + path.string() + "'");
  return parse_assignment(in, &dataset);
}

}  // namespace ccws
