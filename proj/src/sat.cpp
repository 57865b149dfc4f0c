#include "cfx/sat.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <climits>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "cfx/error.hpp"

namespace cfx::sat {

namespace {

class Dpll {
 public:
  explicit Dpll(const Cnf& cnf) : n_(cnf.num_vars), assign_(cnf.num_vars + 1, 0) {
    watches_.resize(2 * (n_ + 1));
    for (const auto& raw : cnf.clauses) {
      std::vector<Lit> c;
      bool tautology = false;
      for (Lit l : raw) {
        if (l == 0 || std::abs(l) > n_) {
          throw Error(ErrorCode::InvalidArgument, "clause literal out of range");
        }
        bool seen = false;
        for (Lit m : c) {
          if (m == l) seen = true;
          if (m == -l) tautology = true;
        }
        if (!seen) c.push_back(l);
      }
      if (tautology) continue;
      if (c.empty()) {
        trivially_unsat_ = true;
        continue;
      }
      if (c.size() == 1) {
        units_.push_back(c[0]);
        continue;
      }
      clauses_.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
      watches_[code(clauses_[i][0])].push_back(i);
      watches_[code(clauses_[i][1])].push_back(i);
    }
  }

  SatResult run() {
    if (trivially_unsat_) return {};
    for (Lit u : units_) {
      if (value(u) < 0) return {};
      if (value(u) == 0) enqueue(u);
    }
    std::vector<std::pair<Lit, bool>> decisions;  // (decision literal, already flipped)
    while (true) {
      if (!propagate()) {
        while (!decisions.empty() && decisions.back().second) {
          undo_to(trail_lim_.back());
          trail_lim_.pop_back();
          decisions.pop_back();
        }
        if (decisions.empty()) return {};
        undo_to(trail_lim_.back());
        decisions.back().second = true;
        enqueue(-decisions.back().first);
        continue;
      }
      if (all_satisfied()) break;
      int var = 1;
      while (var <= n_ && assign_[var] != 0) ++var;
      if (var > n_) break;
      trail_lim_.push_back(trail_.size());
      decisions.emplace_back(var, false);
      enqueue(var);
    }
    SatResult r;
    r.satisfiable = true;
    r.model.assign(n_, false);
    for (int v = 1; v <= n_; ++v) r.model[v - 1] = assign_[v] > 0;
    return r;
  }

 private:
  static std::size_t code(Lit l) { return 2 * static_cast<std::size_t>(std::abs(l)) + (l < 0); }

  int value(Lit l) const {
    const int a = assign_[std::abs(l)];
    return l > 0 ? a : -a;
  }

  void enqueue(Lit l) {
    assign_[std::abs(l)] = l > 0 ? 1 : -1;
    trail_.push_back(l);
  }

  void undo_to(std::size_t size) {
    while (trail_.size() > size) {
      assign_[std::abs(trail_.back())] = 0;
      trail_.pop_back();
    }
    qhead_ = std::min(qhead_, size);
  }

  bool propagate() {
    while (qhead_ < trail_.size()) {
      const Lit falsified = -trail_[qhead_++];
      auto& list = watches_[code(falsified)];
      std::size_t keep = 0;
      for (std::size_t idx = 0; idx < list.size(); ++idx) {
        const std::size_t ci = list[idx];
        auto& c = clauses_[ci];
        if (c[0] == falsified) std::swap(c[0], c[1]);
        if (value(c[0]) > 0) {
          list[keep++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (value(c[k]) >= 0) {
            std::swap(c[1], c[k]);
            watches_[code(c[1])].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        list[keep++] = ci;
        if (value(c[0]) < 0) {
          for (std::size_t rest = idx + 1; rest < list.size(); ++rest) list[keep++] = list[rest];
          list.resize(keep);
          qhead_ = trail_.size();
          return false;
        }
        enqueue(c[0]);
      }
      list.resize(keep);
    }
    return true;
  }

  bool all_satisfied() const {
    for (const auto& c : clauses_) {
      bool sat = false;
      for (Lit l : c) {
        if (value(l) > 0) {
          sat = true;
          break;
        }
      }
      if (!sat) return false;
    }
    return true;
  }

  int n_;
  std::vector<std::vector<Lit>> clauses_;
  std::vector<Lit> units_;
  bool trivially_unsat_ = false;
  std::vector<int> assign_;
  std::vector<std::vector<std::size_t>> watches_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

SatResult DpllBackend::solve(const Cnf& cnf) { return Dpll(cnf).run(); }

SatResult ExecBackend::solve(const Cnf& cnf) {
  const char* tmpdir = std::getenv("TMPDIR");
  std::string path = std::string(tmpdir && *tmpdir ? tmpdir : "/tmp") + "/cfx-XXXXXX.cnf";
  const int fd = mkstemps(path.data(), 4);
  if (fd < 0) throw Error(ErrorCode::BackendFailure, "cannot create temporary CNF file");
  const std::string dimacs = to_dimacs(cnf);
  const bool written = ::write(fd, dimacs.data(), dimacs.size()) ==
                       static_cast<ssize_t>(dimacs.size());
  ::close(fd);
  if (!written) {
    std::remove(path.c_str());
    throw Error(ErrorCode::BackendFailure, "cannot write temporary CNF file");
  }

  const std::string command = shell_quote(executable_) + " " + shell_quote(path);
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) {
    std::remove(path.c_str());
    throw Error(ErrorCode::BackendFailure, "cannot start " + executable_);
  }
  std::string output;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) output.append(buffer, got);
  const int status = ::pclose(pipe);
  std::remove(path.c_str());

  if (status == -1 || !WIFEXITED(status)) {
    throw Error(ErrorCode::BackendFailure, executable_ + " terminated abnormally");
  }
  const int code = WEXITSTATUS(status);
  if (code != 0 && code != 10 && code != 20) {
    throw Error(ErrorCode::BackendFailure,
                executable_ + " exited with status " + std::to_string(code));
  }

  std::optional<bool> verdict;
  std::vector<bool> model(cnf.num_vars, false);
  bool saw_terminator = false;
  std::istringstream lines(output);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream tokens(line);
    std::string tag;
    if (!(tokens >> tag)) continue;
    if (tag == "s") {
      std::string rest;
      std::getline(tokens >> std::ws, rest);
      while (!rest.empty() && (rest.back() == '\r' || rest.back() == ' ')) rest.pop_back();
      if (rest == "SATISFIABLE") {
        verdict = true;
      } else if (rest == "UNSATISFIABLE") {
        verdict = false;
      } else {
        throw Error(ErrorCode::BackendFailure, "unrecognised status line: " + line);
      }
    } else if (tag == "v") {
      long long lit = 0;
      while (tokens >> lit) {
        if (lit == 0) {
          saw_terminator = true;
          continue;
        }
        const long long var = lit < 0 ? -lit : lit;
        if (var > cnf.num_vars) {
          throw Error(ErrorCode::BackendFailure, "model literal out of range: " + line);
        }
        model[var - 1] = lit > 0;
      }
      if (!tokens.eof()) throw Error(ErrorCode::BackendFailure, "malformed value line: " + line);
    }
  }
  if (!verdict) throw Error(ErrorCode::BackendFailure, executable_ + " printed no status line");
  if (!*verdict) return {};
  if (!saw_terminator) throw Error(ErrorCode::BackendFailure, executable_ + " printed no model");
  if (!satisfies(cnf, model)) {
    throw Error(ErrorCode::BackendFailure, executable_ + " returned a non-satisfying model");
  }
  return {true, std::move(model)};
}

SatOracle SatOracle::from_spec(std::string_view spec) {
  if (spec == "builtin") return builtin();
  if (spec.substr(0, 5) == "exec:" && spec.size() > 5) {
    return SatOracle(std::make_shared<ExecBackend>(std::string(spec.substr(5))));
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown SAT backend '" + std::string(spec) + "' (expected builtin or exec:<path>)");
}

bool satisfies(const Cnf& cnf, const std::vector<bool>& model) {
  for (const auto& c : cnf.clauses) {
    bool sat = false;
    for (Lit l : c) {
      const std::size_t v = static_cast<std::size_t>(std::abs(l));
      if (v == 0 || v > model.size()) return false;
      if (model[v - 1] == (l > 0)) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

Lit tseitin(Cnf& cnf, const PropFormula& formula, std::span<const Lit> atom_lits) {
  std::vector<Lit> stack;
  for (const auto& node : formula.program()) {
    using Op = PropFormula::Op;
    if (node.op == Op::Atom) {
      stack.push_back(atom_lits[node.atom]);
      continue;
    }
    if (node.op == Op::Not) {
      stack.back() = -stack.back();
      continue;
    }
    Lit b = stack.back();
    stack.pop_back();
    Lit a = stack.back();
    const Lit g = cnf.new_var();
    switch (node.op) {
      case Op::And:
        cnf.add({-g, a});
        cnf.add({-g, b});
        cnf.add({g, -a, -b});
        break;
      case Op::Implies:
        a = -a;
        [[fallthrough]];
      case Op::Or:
        cnf.add({g, -a});
        cnf.add({g, -b});
        cnf.add({-g, a, b});
        break;
      case Op::Iff:
        cnf.add({-g, -a, b});
        cnf.add({-g, a, -b});
        cnf.add({g, a, b});
        cnf.add({g, -a, -b});
        break;
      default: break;
    }
    stack.back() = g;
  }
  return stack.back();
}

void at_most_k(Cnf& cnf, std::span<const Lit> lits, std::size_t k) {
  const std::size_t n = lits.size();
  if (k >= n) return;
  if (k == 0) {
    for (Lit l : lits) cnf.add({-l});
    return;
  }
  // s[i][j]: at least j+1 of lits[0..i] are true.
  std::vector<std::vector<Lit>> s(n - 1, std::vector<Lit>(k));
  for (auto& row : s) {
    for (auto& v : row) v = cnf.new_var();
  }
  cnf.add({-lits[0], s[0][0]});
  for (std::size_t j = 1; j < k; ++j) cnf.add({-s[0][j]});
  for (std::size_t i = 1; i + 1 < n; ++i) {
    cnf.add({-lits[i], s[i][0]});
    cnf.add({-s[i - 1][0], s[i][0]});
    for (std::size_t j = 1; j < k; ++j) {
      cnf.add({-lits[i], -s[i - 1][j - 1], s[i][j]});
      cnf.add({-s[i - 1][j], s[i][j]});
    }
    cnf.add({-lits[i], -s[i - 1][k - 1]});
  }
  cnf.add({-lits[n - 1], -s[n - 2][k - 1]});
}

void weighted_sum_below(Cnf& cnf, std::span<const Lit> lits, std::span<const double> weights,
                        double bound) {
  if (lits.size() != weights.size()) {
    throw Error(ErrorCode::InvalidArgument, "weighted_sum_below: size mismatch");
  }
  constexpr Lit kTrue = INT_MAX;
  constexpr Lit kFalse = INT_MIN;
  const std::size_t n = lits.size();
  std::map<std::pair<std::size_t, double>, Lit> memo;

  // Node (i, acc) holds iff acc + sum_{j >= i} w_j [l_j] < bound.
  auto build = [&](auto& self, std::size_t i, double acc) -> Lit {
    if (!(acc < bound)) return kFalse;  // weights are non-negative
    double worst = acc;
    for (std::size_t j = i; j < n; ++j) worst += weights[j];
    if (worst < bound) return kTrue;
    const auto key = std::make_pair(i, acc);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const Lit hi = self(self, i + 1, acc + weights[i]);
    const Lit lo = self(self, i + 1, acc);
    const Lit node = cnf.new_var();
    const Lit l = lits[i];
    if (hi == kFalse) {
      cnf.add({-node, -l});
    } else if (hi != kTrue) {
      cnf.add({-node, -l, hi});
    }
    if (lo == kFalse) {
      cnf.add({-node, l});
    } else if (lo != kTrue) {
      cnf.add({-node, l, lo});
    }
    memo.emplace(key, node);
    return node;
  };

  const Lit root = build(build, 0, 0.0);
  if (root == kTrue) return;
  if (root == kFalse) {
    cnf.add(std::vector<Lit>{});
    return;
  }
  cnf.add({root});
}

std::string to_dimacs(const Cnf& cnf) {
  std::string out = "p cnf " + std::to_string(cnf.num_vars) + " " +
                    std::to_string(cnf.clauses.size()) + "\n";
  for (const auto& c : cnf.clauses) {
    for (Lit l : c) {
      out += std::to_string(l);
      out += ' ';
    }
    out += "0\n";
  }
  return out;
}

Cnf parse_dimacs(std::string_view text) {
  Cnf cnf;
  bool have_header = false;
  std::size_t declared_clauses = 0;
  std::size_t header_line = 0;
  std::size_t header_column = 0;
  std::vector<Lit> current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    const std::size_t next = eol + 1;

    std::size_t i = 0;
    auto skip = [&] {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    skip();
    if (i < line.size() && line[i] == 'c') {
      pos = next;
      continue;
    }
    if (i < line.size() && line[i] == '%') break;
    if (i < line.size() && line[i] == 'p') {
      if (have_header) throw ParseError("duplicate problem line", line_no, i + 1);
      std::istringstream in{std::string(line.substr(i + 1))};
      std::string format;
      long long vars = -1;
      long long clauses = -1;
      if (!(in >> format >> vars >> clauses) || format != "cnf" || vars < 0 || clauses < 0 ||
          vars > INT_MAX) {
        throw ParseError("malformed problem line", line_no, i + 1);
      }
      cnf.num_vars = static_cast<int>(vars);
      declared_clauses = static_cast<std::size_t>(clauses);
      have_header = true;
      header_line = line_no;
      header_column = i + 1;
      pos = next;
      continue;
    }
    while (true) {
      skip();
      if (i >= line.size()) break;
      if (!have_header) throw ParseError("clause before problem line", line_no, i + 1);
      const std::size_t start = i;
      if (line[i] == '-' || line[i] == '+') ++i;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      if (i == start || (i == start + 1 && !std::isdigit(static_cast<unsigned char>(line[start]))) ||
          (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))) {
        throw ParseError("expected an integer literal", line_no, start + 1);
      }
      const long long lit = std::strtoll(std::string(line.substr(start, i - start)).c_str(),
                                         nullptr, 10);
      if (lit == 0) {
        cnf.clauses.push_back(std::move(current));
        current.clear();
      } else {
        if ((lit < 0 ? -lit : lit) > cnf.num_vars) {
          throw ParseError("literal exceeds declared variable count", line_no, start + 1);
        }
        current.push_back(static_cast<Lit>(lit));
      }
    }
    pos = next;
  }
  if (!have_header) throw ParseError("missing problem line", 0, 0);
  if (!current.empty()) throw ParseError("unterminated clause at end of input", line_no, 1);
  if (cnf.clauses.size() != declared_clauses) {
    throw ParseError("problem line declares " + std::to_string(declared_clauses) +
                         " clauses but " + std::to_string(cnf.clauses.size()) + " were given",
                     header_line, header_column);
  }
  return cnf;
}

std::string format_result(const SatResult& result) {
  if (!result.satisfiable) return "s UNSATISFIABLE\n";
  std::string out = "s SATISFIABLE\nv";
  std::size_t width = 1;
  for (std::size_t v = 1; v <= result.model.size(); ++v) {
    std::string tok = " " + std::string(result.model[v - 1] ? "" : "-") + std::to_string(v);
    if (width + tok.size() > 78) {
      out += "\nv";
      width = 1;
    }
    out += tok;
    width += tok.size();
  }
  out += " 0\n";
  return out;
}

std::vector<Lit> feature_literals(std::size_t num_features) {
  std::vector<Lit> lits(num_features);
  for (std::size_t f = 0; f < num_features; ++f) lits[f] = static_cast<Lit>(f + 1);
  return lits;
}

Cnf encode_formula(const PropFormula& formula, std::size_t num_features) {
  if (formula.atom_bound() > num_features) {
    throw Error(ErrorCode::TheoryMismatch, "formula mentions more features than the theory has");
  }
  Cnf cnf;
  cnf.num_vars = static_cast<int>(num_features);
  const auto atoms = feature_literals(num_features);
  cnf.add({tseitin(cnf, formula, atoms)});
  return cnf;
}

std::optional<Instance> sat_solve(const PropFormula& formula, std::size_t num_features,
                                  SatOracle& oracle) {
  const SatResult r = oracle.solve(encode_formula(formula, num_features));
  if (!r.satisfiable) return std::nullopt;
  std::vector<ValueId> values(num_features);
  for (std::size_t f = 0; f < num_features; ++f) values[f] = r.model[f] ? 1 : 0;
  return Instance::from_values(std::move(values));
}

}  // namespace cfx::sat
