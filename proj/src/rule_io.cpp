#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "hkgc/rules.hpp"

namespace hkgc {

namespace {

std::string variable(std::size_t i) { return "X" + std::to_string(i); }

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct ParsedAtom {
  std::string name;
  std::size_t first = 0;
  std::size_t second = 0;
};

bool parse_var(std::string_view s, std::size_t& pos, std::size_t& out) {
  if (pos >= s.size() || s[pos] != 'X') return false;
  ++pos;
  auto res = std::from_chars(s.data() + pos, s.data() + s.size(), out);
  if (res.ec != std::errc{} || res.ptr == s.data() + pos) return false;
  pos = static_cast<std::size_t>(res.ptr - s.data());
  return true;
}

/// Parses `name(Xa,Xb)` starting at `pos`; relation names may themselves contain parentheses.
ParsedAtom parse_atom(std::string_view s, std::size_t& pos) {
  for (auto open = s.find("(X", pos); open != std::string_view::npos; open = s.find("(X", open + 1)) {
    std::size_t p = open + 1;
    ParsedAtom atom;
    if (!parse_var(s, p, atom.first)) continue;
    if (p >= s.size() || s[p] != ',') continue;
    ++p;
    if (!parse_var(s, p, atom.second)) continue;
    if (p >= s.size() || s[p] != ')') continue;
    atom.name = std::string(s.substr(pos, open - pos));
    pos = p + 1;
    return atom;
  }
  throw std::invalid_argument("malformed atom in rule: " + std::string(s));
}

RelationId relation_id(const Vocabulary& relations, const std::string& name) {
  auto id = relations.find(name);
  if (!id) throw std::invalid_argument("unknown relation in rule: " + name);
  return *id;
}

}  // namespace

std::string rule_to_string(const ClosedPathRule& rule, const Vocabulary& relations) {
  std::string out = relations.name(rule.head) + "(X0," + variable(rule.body.size()) + ") <= ";
  for (std::size_t i = 0; i < rule.body.size(); ++i) {
    const auto& a = rule.body[i];
    if (i > 0) out += ", ";
    const bool fwd = a.direction == Direction::Forward;
    out += relations.name(a.relation) + "(" + variable(fwd ? i : i + 1) + "," + variable(fwd ? i + 1 : i) + ")";
  }
  return out;
}

ClosedPathRule rule_from_string(std::string_view text, const Vocabulary& relations) {
  const auto arrow = text.find(" <= ");
  if (arrow == std::string_view::npos) throw std::invalid_argument("rule without ' <= ': " + std::string(text));
  const auto head_text = text.substr(0, arrow);
  const auto body_text = text.substr(arrow + 4);

  std::size_t pos = 0;
  auto head = parse_atom(head_text, pos);
  if (pos != head_text.size()) throw std::invalid_argument("trailing text after rule head");

  ClosedPathRule rule{relation_id(relations, head.name), {}};
  pos = 0;
  while (pos < body_text.size()) {
    if (!rule.body.empty()) {
      if (body_text.substr(pos, 2) != ", ") throw std::invalid_argument("expected ', ' between body atoms");
      pos += 2;
    }
    auto atom = parse_atom(body_text, pos);
    const std::size_t i = rule.body.size();
    Direction d;
    if (atom.first == i && atom.second == i + 1) {
      d = Direction::Forward;
    } else if (atom.first == i + 1 && atom.second == i) {
      d = Direction::Inverse;
    } else {
      throw std::invalid_argument("body atom variables do not form a chain: " + std::string(text));
    }
    rule.body.push_back({relation_id(relations, atom.name), d});
  }
  if (rule.body.empty()) throw std::invalid_argument("rule has an empty body");
  if (head.first != 0 || head.second != rule.body.size()) {
    throw std::invalid_argument("rule head must be h(X0,Xn): " + std::string(text));
  }
  return rule;
}

void write_rules(std::ostream& out, const RuleSet& rules, const Vocabulary& relations) {
  for (const auto& r : rules.rules()) {
    out << r.stats.support << '\t' << r.stats.body_groundings << '\t' << format_double(r.stats.confidence) << '\t'
        << rule_to_string(r.rule, relations) << '\n';
  }
}

RuleSet read_rules(std::istream& in, const Vocabulary& relations) {
  RuleSet out(relations.size());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view v(line);
    std::array<std::string_view, 3> fields;
    for (auto& f : fields) {
      auto tab = v.find('\t');
      if (tab == std::string_view::npos) {
        throw std::invalid_argument("rule file line " + std::to_string(lineno) + ": expected 4 tab-separated fields");
      }
      f = v.substr(0, tab);
      v.remove_prefix(tab + 1);
    }
    RuleStats stats;
    auto bad = [&](std::string_view f, auto& target) {
      auto res = std::from_chars(f.data(), f.data() + f.size(), target);
      return res.ec != std::errc{} || res.ptr != f.data() + f.size();
    };
    if (bad(fields[0], stats.support) || bad(fields[1], stats.body_groundings) || bad(fields[2], stats.confidence)) {
      throw std::invalid_argument("rule file line " + std::to_string(lineno) + ": malformed statistics");
    }
    out.insert(rule_from_string(v, relations), stats);
  }
  return out;
}

}  // namespace hkgc
