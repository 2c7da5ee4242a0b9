#pragma once

// Mean and population std over seeds per (instance, H, beta, k).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/harness/runner.hpp"
#include "bcp/json_io.hpp"

namespace bcp::harness {

struct SummaryRow {
  std::string instance_id;
  int H = 0;
  std::string beta;  // label as found in the results file
  int k = 0;
  int n = 0;
  double mean_member = 0.0;
  double std_member = 0.0;
  double mean_mixture = 0.0;
  double std_mixture = 0.0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct MissingCell {
  std::string instance_id;
  int H = 0;
  std::string beta;
  std::uint64_t seed = 0;
  int k = 0;  // 0: the whole cell failed
  std::string reason;
};

struct Summary {
  std::vector<SummaryRow> rows;
  std::vector<MissingCell> missing;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, long line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  out.push_back(std::move(cur));
  return out;
}

template <class T>
T parse_number(const std::string& field, const char* what, long line_no) {
  T value{};
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError(std::string("bad ") + what + " '" + field + "'", line_no);
  return value;
}

inline double parse_real(const std::string& field, const char* what, long line_no) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  return parse_number<double>(field, what, line_no);
}

inline double label_order(const std::string& beta) {
  double v = 0.0;
  const char* end = beta.data() + beta.size();
  auto [ptr, ec] = std::from_chars(beta.data(), end, v);
  return ec == std::errc() && ptr == end ? v : std::numeric_limits<double>::infinity();
}

}  // namespace detail

// Parses a results/v1 file back into rows; runtime is not part of the file.
inline std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty results file", 1);
  ++line_no;
  if (line != kResultsSchema) throw ParseError("schema mismatch: expected '" + std::string(kResultsSchema) + "'", 1);
  if (!std::getline(in, line) || line != kResultsColumns) throw ParseError("schema mismatch: bad column header", 2);
  ++line_no;
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line, line_no);
    if (f.size() != 8) throw ParseError("schema mismatch: expected 8 fields, got " + std::to_string(f.size()), line_no);
    ResultRow r;
    r.instance_id = f[0];
    r.H = detail::parse_number<int>(f[1], "H", line_no);
    r.beta_label = f[2];
    r.beta = detail::label_order(f[2]);
    r.seed = detail::parse_number<std::uint64_t>(f[3], "seed", line_no);
    r.k = detail::parse_number<int>(f[4], "k", line_no);
    r.subopt_member_k = detail::parse_real(f[5], "subopt_member_k", line_no);
    r.subopt_mixture_upto_k = detail::parse_real(f[6], "subopt_mixture_upto_k", line_no);
    r.error = f[7];
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("results file has no data rows", line_no);
  return rows;
}

inline Summary aggregate(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("aggregate: no rows");
  using GroupKey = std::tuple<std::string, int, double, std::string>;
  struct Acc {
    std::vector<double> member, mixture;
    std::set<std::uint64_t> seeds;
  };
  std::map<GroupKey, std::set<std::uint64_t>> group_seeds, failed_seeds;
  std::map<std::tuple<GroupKey, int>, Acc> cells;
  Summary out;
  for (const auto& r : rows) {
    const GroupKey g{r.instance_id, r.H, detail::label_order(r.beta_label), r.beta_label};
    group_seeds[g].insert(r.seed);
    if (!r.error.empty()) {
      out.missing.push_back({r.instance_id, r.H, r.beta_label, r.seed, 0, r.error});
      failed_seeds[g].insert(r.seed);
      continue;
    }
    auto& acc = cells[{g, r.k}];
    if (!acc.seeds.insert(r.seed).second)
      throw ParseError("duplicate row for seed " + std::to_string(r.seed) + " at k = " + std::to_string(r.k), 0);
    acc.member.push_back(r.subopt_member_k);
    acc.mixture.push_back(r.subopt_mixture_upto_k);
  }
  auto mean_std = [](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return std::pair{m, std::sqrt(v / static_cast<double>(xs.size()))};
  };
  for (const auto& [key, acc] : cells) {
    const auto& [g, k] = key;
    SummaryRow s;
    s.instance_id = std::get<0>(g);
    s.H = std::get<1>(g);
    s.beta = std::get<3>(g);
    s.k = k;
    s.n = static_cast<int>(acc.member.size());
    std::tie(s.mean_member, s.std_member) = mean_std(acc.member);
    std::tie(s.mean_mixture, s.std_mixture) = mean_std(acc.mixture);
    out.rows.push_back(s);
    for (std::uint64_t seed : group_seeds[g])
      if (!acc.seeds.count(seed) && !failed_seeds[g].count(seed))
        out.missing.push_back({s.instance_id, s.H, s.beta, seed, k, "no row"});
  }
  return out;
}

inline std::string format_summary_csv(const Summary& s) {
  std::string out = "# bcp summary/v1\ninstance_id,H,beta,k,n,mean_member,std_member,mean_mixture,std_mixture\n";
  for (const auto& r : s.rows)
    out += csv_escape(r.instance_id) + ',' + std::to_string(r.H) + ',' + r.beta + ',' + std::to_string(r.k) + ',' +
           std::to_string(r.n) + ',' + format_shortest(r.mean_member) + ',' + format_shortest(r.std_member) + ',' +
           format_shortest(r.mean_mixture) + ',' + format_shortest(r.std_mixture) + '\n';
  return out;
}

inline std::string format_missing(const Summary& s) {
  std::string out;
  for (const auto& m : s.missing)
    out += "missing: " + m.instance_id + " H=" + std::to_string(m.H) + " beta=" + m.beta + " seed=" +
           std::to_string(m.seed) + (m.k > 0 ? " k=" + std::to_string(m.k) : std::string(" (cell)")) + ": " +
           m.reason + "\n";
  return out;
}

inline std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "# bcp summary/v1") throw ParseError("schema mismatch: not a summary/v1 file", 1);
  if (!std::getline(in, line) || line != "instance_id,H,beta,k,n,mean_member,std_member,mean_mixture,std_mixture")
    throw ParseError("schema mismatch: bad column header", 2);
  long line_no = 2;
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line, line_no);
    if (f.size() != 9) throw ParseError("schema mismatch: expected 9 fields", line_no);
    SummaryRow r;
    r.instance_id = f[0];
    r.H = detail::parse_number<int>(f[1], "H", line_no);
    r.beta = f[2];
    r.k = detail::parse_number<int>(f[3], "k", line_no);
    r.n = detail::parse_number<int>(f[4], "n", line_no);
    r.mean_member = detail::parse_real(f[5], "mean_member", line_no);
    r.std_member = detail::parse_real(f[6], "std_member", line_no);
    r.mean_mixture = detail::parse_real(f[7], "mean_mixture", line_no);
    r.std_mixture = detail::parse_real(f[8], "std_mixture", line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace bcp::harness
