#include "typetree/newick.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <optional>

#include "typetree/error.hpp"

namespace typetree {

namespace {

bool plain_label(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
  return true;
}

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string to_newick(const TypedTree& tree) {
  tree.validate();
  if (tree.empty()) return ";";
  auto ch = tree.children();
  std::string out;
  // iterative post-order emission with explicit open/close markers
  struct Frame {
    int v;
    size_t next;
  };
  std::vector<Frame> stack{{tree.root(), 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto& kids = ch[f.v];
    if (f.next == 0 && !kids.empty()) out += '(';
    if (f.next < kids.size()) {
      if (f.next > 0) out += ',';
      int c = kids[f.next++];
      stack.push_back({c, 0});
      continue;
    }
    if (!kids.empty()) out += ')';
    const Node& n = tree.nodes[f.v];
    if (!n.label.empty()) out += plain_label(n.label) ? n.label : "'" + n.label + "'";
    out += "[&type=" + std::to_string(n.type);
    if (n.extinct) out += ",extinct=1";
    out += ']';
    if (!tree.discrete) {
      if (n.parent >= 0)
        out += ':' + fmt_double(n.time - tree.nodes[n.parent].time);
      else if (n.time != 0.0)
        out += ':' + fmt_double(n.time);
    }
    stack.pop_back();
  }
  out += ';';
  return out;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  TypedTree run(int k) {
    skip_ws();
    if (peek() == ';') fail_here("empty tree");
    int root = parse_node(-1);
    skip_ws();
    if (peek() != ';') fail_here("expected ';'");
    advance();
    skip_ws();
    if (pos_ < s_.size()) fail_here("trailing characters after ';'");

    int maxtype = 0;
    for (const auto& n : raw_) maxtype = std::max(maxtype, n.type);
    if (k == 0) k = std::max(1, maxtype);
    bool any_len = false, all_len = true;
    for (const auto& n : raw_) {
      if (n.parent < 0) continue;
      any_len |= n.length.has_value();
      all_len &= n.length.has_value();
    }
    if (any_len && !all_len) throw ParseError("branch lengths must be given for all or no edges", 1, 1);
    bool discrete = !any_len && !raw_[root].length;

    TypedTree t(k, discrete);
    for (size_t i = 0; i < raw_.size(); ++i) {
      const Raw& r = raw_[i];
      if (r.type < 1 || r.type > k)
        throw ParseError("type " + std::to_string(r.type) + " outside 1.." + std::to_string(k), r.line, r.col);
      NodeKind kind = NodeKind::leaf;
      if (r.nchild == 1)
        kind = r.parent < 0 ? NodeKind::root : NodeKind::unary;
      else if (r.nchild == 2)
        kind = NodeKind::binary;
      else if (r.nchild > 2)
        throw ParseError("node with more than two children", r.line, r.col);
      double time = 0.0;
      if (!discrete) {
        if (r.parent < 0)
          time = r.length.value_or(0.0);
        else
          time = t.nodes[r.parent].time + *r.length;
      }
      int id = t.add_node(r.type, kind, r.parent, time);
      t.nodes[id].extinct = r.extinct;
      t.nodes[id].label = r.label;
    }
    t.validate();
    return t;
  }

 private:
  struct Raw {
    int parent = -1;
    int type = 0;
    int nchild = 0;
    bool extinct = false;
    std::optional<double> length;
    std::string label;
    int line = 1, col = 1;
  };

  std::string_view s_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  std::vector<Raw> raw_;

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void advance() {
    if (pos_ >= s_.size()) return;
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  [[noreturn]] void fail_here(const std::string& msg) const {
    std::string what = msg;
    if (pos_ >= s_.size()) what += " (unexpected end of input)";
    throw ParseError(what, line_, col_);
  }
  void skip_ws() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '[' && (pos_ + 1 >= s_.size() || s_[pos_ + 1] != '&')) {
        // plain bracket comment
        while (pos_ < s_.size() && s_[pos_] != ']') advance();
        if (pos_ >= s_.size()) fail_here("unterminated comment");
        advance();
      } else {
        break;
      }
    }
  }

  // Preorder ids: a node is registered before its children are parsed.
  int parse_node(int parent) {
    int id = static_cast<int>(raw_.size());
    raw_.push_back({});
    raw_[id].parent = parent;
    raw_[id].line = line_;
    raw_[id].col = col_;
    skip_ws();
    if (peek() == '(') {
      advance();
      for (;;) {
        skip_ws();
        if (peek() == ')' || peek() == ',') fail_here("empty child");
        parse_node(id);
        ++raw_[id].nchild;
        skip_ws();
        if (peek() == ',') {
          advance();
          continue;
        }
        if (peek() == ')') {
          advance();
          break;
        }
        fail_here("expected ',' or ')'");
      }
    }
    skip_ws();
    raw_[id].label = parse_label();
    skip_ws();
    bool typed = false;
    while (peek() == '[') {
      parse_annotation(raw_[id], typed);
      skip_ws();
    }
    if (!typed) throw ParseError("node without type", raw_[id].line, raw_[id].col);
    if (peek() == ':') {
      advance();
      skip_ws();
      raw_[id].length = parse_number();
      if (*raw_[id].length < 0) fail_here("negative branch length");
      skip_ws();
    }
    return id;
  }

  std::string parse_label() {
    std::string out;
    if (peek() == '\'') {
      advance();
      while (pos_ < s_.size() && peek() != '\'') {
        out += peek();
        advance();
      }
      if (peek() != '\'') fail_here("unterminated quoted label");
      advance();
      return out;
    }
    while (pos_ < s_.size()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-') {
        out += c;
        advance();
      } else {
        break;
      }
    }
    return out;
  }

  double parse_number() {
    size_t start = pos_;
    while (pos_ < s_.size()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || c == '-' || c == '+')
        advance();
      else
        break;
    }
    double v = 0;
    auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (start == pos_ || res.ec != std::errc() || res.ptr != s_.data() + pos_) fail_here("malformed number");
    return v;
  }

  void parse_annotation(Raw& r, bool& typed) {
    advance();  // '['
    if (peek() != '&') {
      skip_ws();
      return;
    }
    advance();
    for (;;) {
      std::string key;
      while (pos_ < s_.size() && peek() != '=' && peek() != ',' && peek() != ']') {
        key += peek();
        advance();
      }
      std::string value;
      if (peek() == '=') {
        advance();
        while (pos_ < s_.size() && peek() != ',' && peek() != ']') {
          value += peek();
          advance();
        }
      }
      if (key == "type") {
        int v = 0;
        auto res = std::from_chars(value.data(), value.data() + value.size(), v);
        if (value.empty() || res.ec != std::errc() || res.ptr != value.data() + value.size())
          fail_here("type annotation must be an integer");
        r.type = v;
        typed = true;
      } else if (key == "extinct") {
        r.extinct = value == "1" || value == "true";
      }
      if (peek() == ',') {
        advance();
        continue;
      }
      if (peek() == ']') {
        advance();
        return;
      }
      fail_here("unterminated annotation");
    }
  }
};

}  // namespace

TypedTree parse_newick(std::string_view text, int k) { return Parser(text).run(k); }

}  // namespace typetree
