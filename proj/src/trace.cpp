#include "iasolve/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

namespace iasolve {

int Trace::max_staleness() const {
  int worst = 0;
  for (const auto& row : rows) worst = std::max(worst, row.staleness);
  return worst;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_csv(const Trace& trace, const std::string& path, const char* header,
               const std::function<void(std::ofstream&, const TraceRow&)>& emit) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolverError("cannot open trace file: " + path);
  out << header << "\n";
  for (const auto& row : trace.rows) emit(out, row);
}

}  // namespace

void write_primal_csv(const Trace& trace, const std::string& path) {
  write_csv(trace, path, "k,i_k,alpha_k,err,obj,staleness",
            [](std::ofstream& out, const TraceRow& r) {
              out << r.k << ',' << r.i << ',' << format_double(r.alpha) << ','
                  << format_double(r.err) << ',' << format_double(r.obj) << ','
                  << r.staleness << "\n";
            });
}

void write_dual_csv(const Trace& trace, const std::string& path) {
  write_csv(trace, path, "k,i_k,alpha_k,residual,lambda_err,obj,staleness",
            [](std::ofstream& out, const TraceRow& r) {
              out << r.k << ',' << r.i << ',' << format_double(r.alpha) << ','
                  << format_double(r.residual) << ',' << format_double(r.err) << ','
                  << format_double(r.obj) << ',' << r.staleness << "\n";
            });
}

void write_multiplier_csv(const Trace& trace, const std::string& path) {
  write_csv(trace, path, "k,i_k,alpha_k,err,obj,staleness,mu_min,x_min",
            [](std::ofstream& out, const TraceRow& r) {
              out << r.k << ',' << r.i << ',' << format_double(r.alpha) << ','
                  << format_double(r.err) << ',' << format_double(r.obj) << ','
                  << r.staleness << ',' << format_double(r.mu_min) << ','
                  << format_double(r.x_min) << "\n";
            });
}

}  // namespace iasolve
