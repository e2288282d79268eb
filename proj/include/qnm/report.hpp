#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qnm/design.hpp"
#include "qnm/perturbation.hpp"
#include "qnm/ptmodel.hpp"
#include "qnm/spectral.hpp"

namespace qnm {

using Cell = std::variant<double, long long, bool, std::string>;

// Row-major table; every output of the command-line tool goes through one.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

// 15 significant digits
std::string format_number(double v);

std::string to_csv(const Table& t);
// Array of row objects.
std::string to_structured(const Table& t);

// re_omega, im_omega, multiplicity, residual, re_W_lead, im_W_lead
Table spectrum_table(const SpectrumReport& r);
std::string spectrum_structured(const SpectrumReport& r);

// lambda, n, re_omega, im_omega
Table fan_table(const SplitReport& r);
std::string split_structured(const SplitReport& r);

// lambda, root, re_omega, im_omega
Table root_track_table(const RootTrack& r);

// alpha, W02, W03, gamma, mu, admissible, winding
Table third_order_table(const std::vector<ThirdOrderRoot>& roots);

// L, V0_star, re_omega, im_omega, segments
Table pt_table(const std::vector<std::pair<double, PTCriticalPoint>>& points);

}  // namespace qnm
