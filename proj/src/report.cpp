#include "report.hpp"

#include <cstdio>
#include <fstream>

namespace driftctl {

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(ErrorCode::kIoError, "write to '" + path + "' failed");
}

std::string solution_csv(const BellmanSolution& sol) {
  const auto& z = sol.z();
  const auto& v = sol.v->v();
  std::string s = "# sigma2=" + format_number(sol.params.sigma2) +
                  ",b=" + format_number(sol.params.b) +
                  ",p=" + format_number(sol.params.p) +
                  ",gamma=" + format_number(sol.gamma) +
                  ",residual_max=" + format_number(sol.residual_max) + "\n";
  s += "z,v,f,theta\n";
  for (std::size_t i = 0; i < z.size(); ++i)
    s += format_number(z[i]) + "," + format_number(v[i]) + "," +
         format_number(sol.f[i]) + "," + format_number(sol.theta[i]) + "\n";
  return s;
}

std::string summary_text(const Summary& sm) {
  std::string s;
  for (const auto& [k, v] : sm) s += k + "=" + v + "\n";
  return s;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "p,gamma,beta,gap\n";
  for (const SweepRow& r : rows)
    s += format_number(r.p) + "," + format_number(r.gamma) + "," +
         format_number(r.beta) + "," + format_number(r.gap) + "\n";
  return s;
}

std::string path_csv(const std::vector<PathSample>& path) {
  std::string s = "t,Z,L,U,xi\n";
  for (const PathSample& r : path)
    s += format_number(r.t) + "," + format_number(r.z) + "," +
         format_number(r.L) + "," + format_number(r.U) + "," +
         format_number(r.xi) + "\n";
  return s;
}

std::string histogram_csv(const std::vector<double>& hist, double b) {
  std::string s = "z_lo,z_hi,fraction\n";
  const double w = b / double(hist.size());
  for (std::size_t i = 0; i < hist.size(); ++i)
    s += format_number(w * double(i)) + "," +
         format_number(i + 1 == hist.size() ? b : w * double(i + 1)) + "," +
         format_number(hist[i]) + "\n";
  return s;
}

}  // namespace driftctl
