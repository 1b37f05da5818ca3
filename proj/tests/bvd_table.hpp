#pragma once

#include <array>

namespace lumibal::testing {

// Published full results of the BVD top-N experiment, one row per N
// (10k down to 1k). Shifts are in percent against the unbalanced baseline.
struct BvdTableRow {
  int n_thousands;
  double mean_a;
  double shift_a;
  double mean_b;
  double shift_b;
  double dprime;
  double dprime_shift;
};

inline constexpr std::array<BvdTableRow, 10> kBvdTable = {{
    {10, 0.7468, 3.66, 0.7758, 2.03, 0.3925, -24.23},
    {9, 0.7473, 3.73, 0.7760, 2.05, 0.3885, -25.00},
    {8, 0.7474, 3.75, 0.7761, 2.06, 0.3881, -25.08},
    {7, 0.7482, 3.86, 0.7763, 2.09, 0.3801, -26.62},
    {6, 0.7484, 3.89, 0.7760, 2.05, 0.3728, -28.03},
    {5, 0.7494, 4.03, 0.7761, 2.06, 0.3605, -30.41},
    {4, 0.7495, 4.04, 0.7761, 2.06, 0.3583, -30.83},
    {3, 0.7497, 4.07, 0.7751, 1.93, 0.3368, -34.98},
    {2, 0.7490, 3.97, 0.7742, 1.81, 0.3351, -35.31},
    {1, 0.7506, 4.19, 0.7712, 1.42, 0.2756, -46.80},
}};

}  // namespace lumibal::testing
