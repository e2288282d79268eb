#include "qnm/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "qnm/errors.hpp"

namespace qnm {

namespace {

using nlohmann::json;

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  return std::get<std::string>(c);
}

json number_json(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_number(v));
}

json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return number_json(*d);
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  if (const auto* b = std::get_if<bool>(&c)) return *b;
  return std::get<std::string>(c);
}

json complex_json(cdouble z) { return json::array({number_json(z.real()), number_json(z.imag())}); }

json table_json(const Table& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json o = json::object();
    for (std::size_t i = 0; i < t.columns.size(); ++i) o[t.columns[i]] = cell_json(r[i]);
    rows.push_back(o);
  }
  return rows;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw InvariantError("table row width does not match its header");
  rows.push_back(std::move(row));
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string to_csv(const Table& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_escape(t.columns[i]);
  out << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_escape(cell_text(r[i]));
    out << "\n";
  }
  return out.str();
}

std::string to_structured(const Table& t) { return table_json(t).dump(1) + "\n"; }

Table spectrum_table(const SpectrumReport& r) {
  Table t{{"re_omega", "im_omega", "multiplicity", "residual", "re_W_lead", "im_W_lead"}, {}};
  for (const auto& z : r.zeros)
    t.add({z.omega.real(), z.omega.imag(), static_cast<long long>(z.multiplicity), z.residual, z.w_lead.real(),
           z.w_lead.imag()});
  return t;
}

std::string spectrum_structured(const SpectrumReport& r) {
  json j;
  j["search_box"] = {{"re_lo", number_json(r.search_box.re_lo)},
                     {"re_hi", number_json(r.search_box.re_hi)},
                     {"im_lo", number_json(r.search_box.im_lo)},
                     {"im_hi", number_json(r.search_box.im_hi)}};
  j["total_count"] = r.total_count;
  j["zeros"] = table_json(spectrum_table(r));
  return j.dump(1) + "\n";
}

Table fan_table(const SplitReport& r) {
  Table t{{"lambda", "n", "re_omega", "im_omega"}, {}};
  for (std::size_t n = 0; n < r.frequencies.size(); ++n)
    t.add({r.lambda, static_cast<long long>(n), r.frequencies[n].real(), r.frequencies[n].imag()});
  return t;
}

std::string split_structured(const SplitReport& r) {
  json j;
  j["omega"] = complex_json(r.omega);
  j["multiplicity"] = r.multiplicity;
  j["lambda"] = number_json(r.lambda);
  j["alpha"] = complex_json(r.alpha);
  j["s"] = complex_json(r.s);
  json f = json::array();
  for (const auto& w : r.frequencies) f.push_back(complex_json(w));
  j["frequencies"] = f;
  j["second_order"] = complex_json(r.second_order);
  j["note"] = r.note;
  return j.dump(1) + "\n";
}

Table root_track_table(const RootTrack& r) {
  Table t{{"lambda", "root", "re_omega", "im_omega"}, {}};
  for (std::size_t i = 0; i < r.lambdas.size(); ++i)
    for (std::size_t k = 0; k < r.roots[i].size(); ++k)
      t.add({r.lambdas[i], static_cast<long long>(k), r.roots[i][k].real(), r.roots[i][k].imag()});
  return t;
}

Table third_order_table(const std::vector<ThirdOrderRoot>& roots) {
  Table t{{"alpha", "W02", "W03", "gamma", "mu", "admissible", "winding"}, {}};
  for (const auto& r : roots)
    t.add({r.alpha, r.w02, r.w03, r.gamma, r.mu, r.admissible,
           static_cast<long long>(r.multiplicity ? r.multiplicity->winding : 0)});
  return t;
}

Table pt_table(const std::vector<std::pair<double, PTCriticalPoint>>& points) {
  Table t{{"L", "V0_star", "re_omega", "im_omega", "segments"}, {}};
  for (const auto& [L, p] : points)
    t.add({L, p.V0, p.omega.real(), p.omega.imag(), static_cast<long long>(p.segments)});
  return t;
}

}  // namespace qnm
