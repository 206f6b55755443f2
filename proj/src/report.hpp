#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bellman.hpp"
#include "simulator.hpp"

namespace driftctl {

/// Shortest round-trip text: 17 significant digits.
std::string format_number(double x);

/// Ordered key=value lines.
using Summary = std::vector<std::pair<std::string, std::string>>;

void write_text(const std::string& path, const std::string& content);

std::string solution_csv(const BellmanSolution& sol);
std::string summary_text(const Summary& s);

struct SweepRow {
  double p, gamma, beta, gap;
};
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string path_csv(const std::vector<PathSample>& path);
std::string histogram_csv(const std::vector<double>& hist, double b);

}  // namespace driftctl
