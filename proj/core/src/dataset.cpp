#include "ccws/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "ccws/errors.hpp"

namespace ccws {

void Dataset::add(std::string id, SparseVector vector) {
  if (id.empty() || id.front() == '#' ||
      id.find_first_of(" \t\r\n") != std::string::npos) {
    throw InvalidArgumentError("dataset: user id must be a non-empty token without whitespace "
                               "and must not start with '#'");
  }
  if (vector.dimensionality() != d_) {
    throw InvalidArgumentError("dataset: user '" + id + "' has dimensionality " +
                               std::to_string(vector.dimensionality()) + ", expected " +
                               std::to_string(d_));
  }
  if (index_.contains(id)) throw InvalidArgumentError("dataset: duplicate user id '" + id + "'");
  index_.emplace(id, users_.size());
  users_.push_back(User{std::move(id), std::move(vector)});
}

std::optional<std::size_t> Dataset::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dataset::index_of(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw LookupError("unknown user id '" + std::string(id) + "'");
}

namespace detail {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view token) {
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

std::optional<std::uint64_t> parse_u64(std::string_view token) {
  std::uint64_t value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace detail

namespace {

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

SparseVector parse_entries(std::string_view body, std::uint64_t d, std::size_t line_no) {
  std::vector<Dim> dims;
  std::vector<double> weights;
  std::size_t pos = 0;
  while (pos < body.size()) {
    if (body[pos] == ' ') {
      ++pos;
      continue;
    }
    const std::size_t end = std::min(body.find(' ', pos), body.size());
    const std::string_view token = body.substr(pos, end - pos);
    pos = end;

    const std::size_t colon = token.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(line_no, "expected idx:weight, got '" + std::string(token) + "'");
    }
    const auto idx = detail::parse_u64(token.substr(0, colon));
    if (!idx || *idx >= d) {
      throw ParseError(line_no, "bad index '" + std::string(token.substr(0, colon)) + "'");
    }
    const auto w = detail::parse_double(token.substr(colon + 1));
    if (!w || !std::isfinite(*w) || !(*w > 0.0)) {
      throw ParseError(line_no,
                       "weight must be a positive decimal, got '" +
                           std::string(token.substr(colon + 1)) + "'");
    }
    if (!dims.empty() && *idx <= dims.back()) {
      throw ParseError(line_no, "indices must be strictly ascending");
    }
    dims.push_back(static_cast<Dim>(*idx));
    weights.push_back(*w);
  }
  return SparseVector(d, std::move(dims), std::move(weights));
}

}  // namespace

Dataset parse_dataset(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  std::optional<Dataset> dataset;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim_cr(raw);
    if (!dataset) {
      if (is_blank(line)) continue;
      if (!line.starts_with("#d ")) throw ParseError(line_no, "expected header '#d <dimensionality>'");
      const auto d = detail::parse_u64(line.substr(3));
      if (!d || *d == 0 || *d > (std::uint64_t{1} << 32)) {
        throw ParseError(line_no, "bad dimensionality in header");
      }
      dataset.emplace(*d);
      continue;
    }
    if (is_blank(line) || line.front() == '#') continue;

    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw ParseError(line_no, "expected user_id<TAB>entries");
    }
    std::string id(line.substr(0, tab));
    if (dataset->find(id)) throw ParseError(line_no, "duplicate user id '" + id + "'");
    SparseVector vector = parse_entries(line.substr(tab + 1), dataset->dimensionality(), line_no);
    try {
      dataset->add(std::move(id), std::move(vector));
    } catch (const InvalidArgumentError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!dataset) throw ParseError(0, "missing header '#d <dimensionality>'");
  return std::move(*dataset);
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  out << "#d " << dataset.dimensionality() << '\n';
  for (const User& user : dataset.users()) {
    out << user.id << '\t';
    const auto dims = user.vector.dims();
    const auto weights = user.vector.weights();
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (k > 0) out << ' ';
      out << dims[k] << ':' << detail::format_double(weights[k]);
    }
    out << '\n';
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in);
}

void store_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset '" + path.string() + "'");
  write_dataset(dataset, out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace ccws
