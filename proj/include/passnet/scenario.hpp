#pragma once

// Scenario files are plain UTF-8 text: '#' starts a comment, blank lines
// are ignored, '[section]' opens a section, and every other line is a
// directive. Canonical example:
//
//   name two_node_smoke
//
//   [graph]
//   vertices 2
//   edge 1 2
//   edge 2 1
//
//   [agents]
//   all integrator
//
//   [controllers]
//   all static_gain b=1 gamma=1 alpha=0
//
//   [initial]
//   x0 1 -1
//
//   [integration]
//   dt 0.001
//   t_end 5
//   record_stride 10
//
//   [audits]
//   audit agent_relation tol=1e-4
//
//   [certificate]
//   check alpha=1.2 gamma=0.2
//
// Agent kinds: integrator, integrator_tanh, integrator_saturation.
// Controller kinds: static_gain (param b, optional declared gamma/alpha).
// Audit ids: agent_relation, controller_relation, compensation, iop_agent.
// The certificate section holds either 'check' with direct alpha/gamma
// (optional M override) or 'static_gain_search b=<gain>'.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "passnet/models.hpp"
#include "passnet/network.hpp"
#include "passnet/sim.hpp"

namespace passnet {

struct AgentSpec {
  std::string kind;
  std::map<std::string, double> params;
  bool operator==(const AgentSpec&) const = default;
};

struct ControllerSpec {
  std::string kind;
  std::map<std::string, double> params;
  bool operator==(const ControllerSpec&) const = default;
};

struct AuditSpec {
  std::string id;
  std::map<std::string, double> params;
  bool operator==(const AuditSpec&) const = default;
};

struct CertificateSpec {
  bool search = false;                  // static-gain feasibility search
  std::map<std::string, double> params; // b / M / alpha / gamma
  bool operator==(const CertificateSpec&) const = default;
};

struct ScenarioIntegration {
  double dt = 1e-3;
  double t_end = 20.0;
  int record_stride = 1;
  bool operator==(const ScenarioIntegration&) const = default;
};

struct Scenario {
  std::string name;
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<AgentSpec> agents;
  std::vector<ControllerSpec> controllers;
  Vec x0;
  ScenarioIntegration integration;
  std::vector<AuditSpec> audits;
  std::optional<CertificateSpec> certificate;
  bool operator==(const Scenario&) const = default;
};

/// One load-time problem: source line (0 for file-level issues), the
/// offending field, a stable machine code, and a human message.
struct Diagnostic {
  int line = 0;
  std::string field;
  std::string code;
  std::string message;
};

struct ParseResult {
  std::optional<Scenario> scenario;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return scenario.has_value() && diagnostics.empty(); }
};

namespace detail {

inline std::vector<std::string> split_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_double(const std::string& tok, double& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size() && end != begin;
}

inline bool parse_int(const std::string& tok, int& out) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

struct RawLine {
  int number = 0;
  std::vector<std::string> tokens;
};

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

namespace scenario_detail {

class Parser {
 public:
  ParseResult parse(std::string_view text) {
    collect_sections(text);

    Scenario s;
    parse_name(s);
    parse_graph(s);
    parse_agents(s);
    parse_controllers(s);
    parse_initial(s);
    parse_integration(s);
    parse_audits(s);
    parse_certificate(s);
    validate_dimensions(s);

    ParseResult result;
    result.diagnostics = std::move(diags_);
    if (result.diagnostics.empty()) result.scenario = std::move(s);
    return result;
  }

 private:
  static constexpr const char* kSections[] = {"graph",       "agents", "controllers",
                                              "initial",     "integration", "audits",
                                              "certificate"};

  void collect_sections(std::string_view text) {
    std::string current;  // "" = preamble
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                            : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos)
        line = line.substr(0, hash);
      auto tokens = detail::split_tokens(line);
      if (tokens.empty()) continue;
      if (tokens.size() == 1 && tokens[0].size() >= 2 && tokens[0].front() == '[' &&
          tokens[0].back() == ']') {
        current = tokens[0].substr(1, tokens[0].size() - 2);
        bool known = false;
        for (const char* sec : kSections) known = known || current == sec;
        if (!known) {
          error(line_no, current, "unknown-section", "unknown section [" + current + "]");
          current = "!ignored";
        }
        continue;
      }
      sections_[current].push_back({line_no, std::move(tokens)});
    }
  }

  void parse_name(Scenario& s) {
    for (const auto& ln : sections_[""]) {
      if (ln.tokens[0] == "name" && ln.tokens.size() == 2) {
        s.name = ln.tokens[1];
      } else {
        error(ln.number, ln.tokens[0], "unknown-key",
              "expected 'name <identifier>' before the first section");
      }
    }
    if (s.name.empty()) error(0, "name", "missing-field", "scenario has no 'name' line");
  }

  void parse_graph(Scenario& s) {
    if (!sections_.count("graph")) {
      error(0, "graph", "missing-section", "missing graph section");
      return;
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& ln : sections_["graph"]) {
      const auto& t = ln.tokens;
      if (t[0] == "vertices" && t.size() == 2) {
        if (!detail::parse_int(t[1], s.vertices) || s.vertices < 1)
          error(ln.number, "vertices", "bad-value", "vertex count must be a positive integer");
      } else if (t[0] == "edge" && t.size() == 3) {
        int h = 0, tail = 0;
        if (!detail::parse_int(t[1], h) || !detail::parse_int(t[2], tail)) {
          error(ln.number, "edge", "bad-value", "edge endpoints must be integers");
          continue;
        }
        if (h == tail) {
          error(ln.number, "edge", "bad-edge", "self-loop on vertex " + t[1]);
          continue;
        }
        if (!seen.insert({h, tail}).second) {
          error(ln.number, "edge", "bad-edge", "duplicate edge " + t[1] + " -> " + t[2]);
          continue;
        }
        s.edges.emplace_back(h, tail);
      } else {
        error(ln.number, t[0], "unknown-key", "unknown graph directive '" + t[0] + "'");
      }
    }
    if (s.vertices < 1) {
      error(0, "vertices", "missing-field", "graph section has no 'vertices' line");
      return;
    }
    for (const auto& [h, t] : s.edges) {
      if (h < 1 || h > s.vertices || t < 1 || t > s.vertices)
        error(0, "edge", "bad-edge",
              "edge " + std::to_string(h) + " -> " + std::to_string(t) + " out of range");
    }
  }

  template <typename SpecT>
  void parse_kind_list(const char* section, const char* directive, int expected_count,
                       const std::set<std::string>& kinds, std::vector<SpecT>& out) {
    if (!sections_.count(section)) {
      error(0, section, "missing-section", std::string("missing ") + section + " section");
      return;
    }
    for (const auto& ln : sections_[section]) {
      const auto& t = ln.tokens;
      const bool is_all = t[0] == "all";
      if (!is_all && t[0] != directive) {
        error(ln.number, t[0], "unknown-key",
              std::string("expected '") + directive + "' or 'all' in [" + section + "]");
        continue;
      }
      if (t.size() < 2) {
        error(ln.number, t[0], "bad-value", "missing kind");
        continue;
      }
      SpecT spec;
      spec.kind = t[1];
      if (!kinds.count(spec.kind)) {
        error(ln.number, t[1], "unknown-kind",
              "unknown kind '" + spec.kind + "' in [" + section + "]");
        continue;
      }
      bool params_ok = true;
      for (std::size_t i = 2; i < t.size(); ++i)
        params_ok = parse_param(ln.number, t[i], spec.params) && params_ok;
      if (!params_ok) continue;
      if (is_all) {
        if (expected_count <= 0) continue;  // graph errors already reported
        out.assign(static_cast<std::size_t>(expected_count), spec);
      } else {
        out.push_back(std::move(spec));
      }
    }
  }

  void parse_agents(Scenario& s) {
    parse_kind_list("agents", "agent", s.vertices,
                    {"integrator", "integrator_tanh", "integrator_saturation"}, s.agents);
  }

  void parse_controllers(Scenario& s) {
    parse_kind_list("controllers", "controller", static_cast<int>(s.edges.size()),
                    {"static_gain"}, s.controllers);
  }

  void parse_initial(Scenario& s) {
    if (!sections_.count("initial")) {
      error(0, "initial", "missing-section", "missing initial section");
      return;
    }
    for (const auto& ln : sections_["initial"]) {
      const auto& t = ln.tokens;
      if (t[0] != "x0") {
        error(ln.number, t[0], "unknown-key", "expected 'x0 <values...>' in [initial]");
        continue;
      }
      for (std::size_t i = 1; i < t.size(); ++i) {
        double v = 0.0;
        if (!detail::parse_double(t[i], v)) {
          error(ln.number, "x0", "bad-value", "cannot parse '" + t[i] + "' as a number");
        } else if (!std::isfinite(v)) {
          error(ln.number, "x0", "non-finite", "x0 entries must be finite");
        } else {
          s.x0.push_back(v);
        }
      }
    }
    if (s.x0.empty()) error(0, "x0", "missing-field", "initial section has no x0 values");
  }

  void parse_integration(Scenario& s) {
    if (!sections_.count("integration")) return;  // defaults apply
    for (const auto& ln : sections_["integration"]) {
      const auto& t = ln.tokens;
      if (t.size() != 2) {
        error(ln.number, t[0], "bad-value", "integration directives take one value");
        continue;
      }
      if (t[0] == "dt" || t[0] == "t_end") {
        double v = 0.0;
        if (!detail::parse_double(t[1], v) || !std::isfinite(v) || v <= 0.0) {
          error(ln.number, t[0], "bad-value", t[0] + " must be a positive finite number");
        } else if (t[0] == "dt") {
          s.integration.dt = v;
        } else {
          s.integration.t_end = v;
        }
      } else if (t[0] == "record_stride") {
        int v = 0;
        if (!detail::parse_int(t[1], v) || v < 1)
          error(ln.number, t[0], "bad-value", "record_stride must be a positive integer");
        else
          s.integration.record_stride = v;
      } else {
        error(ln.number, t[0], "unknown-key", "unknown integration directive '" + t[0] + "'");
      }
    }
  }

  void parse_audits(Scenario& s) {
    if (!sections_.count("audits")) return;
    const std::set<std::string> ids = {"agent_relation", "controller_relation", "compensation",
                                       "iop_agent"};
    for (const auto& ln : sections_["audits"]) {
      const auto& t = ln.tokens;
      if (t[0] != "audit" || t.size() < 2) {
        error(ln.number, t[0], "unknown-key", "expected 'audit <id> [k=v...]' in [audits]");
        continue;
      }
      AuditSpec a;
      a.id = t[1];
      if (!ids.count(a.id)) {
        error(ln.number, t[1], "unknown-kind", "unknown audit id '" + a.id + "'");
        continue;
      }
      bool ok = true;
      for (std::size_t i = 2; i < t.size(); ++i) ok = parse_param(ln.number, t[i], a.params) && ok;
      if (ok) s.audits.push_back(std::move(a));
    }
  }

  void parse_certificate(Scenario& s) {
    if (!sections_.count("certificate")) return;
    for (const auto& ln : sections_["certificate"]) {
      const auto& t = ln.tokens;
      CertificateSpec c;
      if (t[0] == "static_gain_search") {
        c.search = true;
      } else if (t[0] == "check") {
        c.search = false;
      } else {
        error(ln.number, t[0], "unknown-key",
              "expected 'check' or 'static_gain_search' in [certificate]");
        continue;
      }
      bool ok = true;
      for (std::size_t i = 1; i < t.size(); ++i) ok = parse_param(ln.number, t[i], c.params) && ok;
      if (!ok) continue;
      if (s.certificate)
        error(ln.number, t[0], "bad-value", "certificate section has more than one directive");
      else
        s.certificate = std::move(c);
    }
  }

  void validate_dimensions(Scenario& s) {
    if (s.vertices >= 1 && !s.agents.empty() &&
        s.agents.size() != static_cast<std::size_t>(s.vertices))
      error(0, "agents", "dimension-mismatch",
            std::to_string(s.agents.size()) + " agents for " + std::to_string(s.vertices) +
                " vertices");
    if (!s.edges.empty() && !s.controllers.empty() && s.controllers.size() != s.edges.size())
      error(0, "controllers", "dimension-mismatch",
            std::to_string(s.controllers.size()) + " controllers for " +
                std::to_string(s.edges.size()) + " edges");
    if (!s.controllers.empty() && s.edges.empty())
      error(0, "controllers", "dimension-mismatch",
            std::to_string(s.controllers.size()) + " controllers for 0 edges");
    // Built-in agents are scalar and static gains stateless, so the
    // stacked dimension equals the vertex count.
    if (s.vertices >= 1 && !s.x0.empty() && s.x0.size() != static_cast<std::size_t>(s.vertices))
      error(0, "x0", "dimension-mismatch",
            "x0 has " + std::to_string(s.x0.size()) + " entries, expected " +
                std::to_string(s.vertices));
  }

  bool parse_param(int line, const std::string& token, std::map<std::string, double>& params) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == token.size()) {
      error(line, token, "bad-value", "expected key=value, got '" + token + "'");
      return false;
    }
    const std::string key = token.substr(0, eq);
    double v = 0.0;
    if (!detail::parse_double(token.substr(eq + 1), v)) {
      error(line, key, "bad-value", "cannot parse value of '" + key + "'");
      return false;
    }
    if (!std::isfinite(v)) {
      error(line, key, "non-finite", "parameter '" + key + "' must be finite");
      return false;
    }
    params[key] = v;
    return true;
  }

  void error(int line, std::string field, std::string code, std::string message) {
    diags_.push_back({line, std::move(field), std::move(code), std::move(message)});
  }

  std::map<std::string, std::vector<detail::RawLine>> sections_;
  std::vector<Diagnostic> diags_;
};

}  // namespace scenario_detail

inline ParseResult parse_scenario(std::string_view text) {
  return scenario_detail::Parser{}.parse(text);
}

/// Canonical text form; parse(serialize(s)) reproduces s exactly.
inline std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  auto params = [&](const std::map<std::string, double>& p) {
    for (const auto& [k, v] : p) out << ' ' << k << '=' << detail::format_number(v);
  };
  out << "name " << s.name << "\n\n[graph]\nvertices " << s.vertices << '\n';
  for (const auto& [h, t] : s.edges) out << "edge " << h << ' ' << t << '\n';
  out << "\n[agents]\n";
  for (const auto& a : s.agents) {
    out << "agent " << a.kind;
    params(a.params);
    out << '\n';
  }
  out << "\n[controllers]\n";
  for (const auto& c : s.controllers) {
    out << "controller " << c.kind;
    params(c.params);
    out << '\n';
  }
  out << "\n[initial]\nx0";
  for (double v : s.x0) out << ' ' << detail::format_number(v);
  out << "\n\n[integration]\ndt " << detail::format_number(s.integration.dt) << "\nt_end "
      << detail::format_number(s.integration.t_end) << "\nrecord_stride "
      << s.integration.record_stride << '\n';
  if (!s.audits.empty()) {
    out << "\n[audits]\n";
    for (const auto& a : s.audits) {
      out << "audit " << a.id;
      params(a.params);
      out << '\n';
    }
  }
  if (s.certificate) {
    out << "\n[certificate]\n" << (s.certificate->search ? "static_gain_search" : "check");
    params(s.certificate->params);
    out << '\n';
  }
  return out.str();
}

/// Digraph declared by a scenario. The parser has already validated the
/// edge list, so construction cannot fail for a parsed scenario.
inline Digraph scenario_digraph(const Scenario& s) { return Digraph(s.vertices, s.edges); }

inline NetworkSystem build_network(const Scenario& s) {
  std::vector<AgentModel> agents;
  for (const auto& spec : s.agents) {
    AgentModel a = builtin_agent(spec.kind);
    if (spec.params.count("delta") || spec.params.count("epsilon")) {
      PassivityIndices idx;
      if (auto it = spec.params.find("delta"); it != spec.params.end()) idx.input = it->second;
      if (auto it = spec.params.find("epsilon"); it != spec.params.end()) idx.output = it->second;
      a.indices = idx;
    }
    agents.push_back(std::move(a));
  }
  std::vector<ControllerModel> controllers;
  for (const auto& spec : s.controllers) {
    const auto it = spec.params.find("b");
    const double b = it != spec.params.end() ? it->second : 1.0;
    ControllerModel c = static_gain(b);
    if (spec.params.count("gamma") || spec.params.count("alpha")) {
      PassivityIndices idx;
      if (auto p = spec.params.find("gamma"); p != spec.params.end()) idx.input = p->second;
      if (auto p = spec.params.find("alpha"); p != spec.params.end()) idx.output = p->second;
      c.indices = idx;
    }
    controllers.push_back(std::move(c));
  }
  return assemble(std::move(agents), std::move(controllers), scenario_digraph(s));
}

}  // namespace passnet
