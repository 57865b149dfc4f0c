// cfx-dpll: the built-in DPLL solver as a standalone DIMACS solver.
//
// Prints a SAT-competition result block and exits 10 (SAT) or 20 (UNSAT);
// 1 on unreadable or malformed input.

#include <cstdio>
#include <iostream>

#include "cfx/error.hpp"
#include "cfx/io.hpp"
#include "cfx/sat.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: cfx-dpll <file.cnf>\n";
    return 1;
  }
  try {
    const cfx::sat::Cnf cnf = cfx::sat::parse_dimacs(cfx::io::read_file(argv[1]));
    cfx::sat::DpllBackend solver;
    const cfx::sat::SatResult result = solver.solve(cnf);
    const std::string out = cfx::sat::format_result(result);
    std::fwrite(out.data(), 1, out.size(), stdout);
    return result.satisfiable ? 10 : 20;
  } catch (const cfx::ParseError& e) {
    std::cerr << "cfx-dpll: " << argv[1] << ":" << e.line() << ":" << e.column() << ": " << e.what()
              << "\n";
  } catch (const std::exception& e) {
    std::cerr << "cfx-dpll: " << e.what() << "\n";
  }
  return 1;
}
