#include "mdt/slowly_varying.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include "mdt/errors.hpp"

namespace mdt {

struct SlowlyVarying::Node {
  Kind kind;
  double value;  // constant or exponent
  std::shared_ptr<const Node> left;
  std::shared_ptr<const Node> right;
};

SlowlyVarying::SlowlyVarying()
    : node_(std::make_shared<const Node>(Node{Kind::Constant, 1.0, nullptr, nullptr})) {}

SlowlyVarying::SlowlyVarying(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

SlowlyVarying SlowlyVarying::constant(double c) {
  if (!std::isfinite(c) || c <= 0.0) {
    throw DomainError("slowly varying constant must be finite and > 0");
  }
  return SlowlyVarying(std::make_shared<const Node>(Node{Kind::Constant, c, nullptr, nullptr}));
}

SlowlyVarying SlowlyVarying::log_power(double r) {
  if (!std::isfinite(r)) throw DomainError("log-power exponent must be finite");
  return SlowlyVarying(std::make_shared<const Node>(Node{Kind::LogPower, r, nullptr, nullptr}));
}

SlowlyVarying SlowlyVarying::iter_log_power(double r) {
  if (!std::isfinite(r)) throw DomainError("iterated log-power exponent must be finite");
  return SlowlyVarying(
      std::make_shared<const Node>(Node{Kind::IterLogPower, r, nullptr, nullptr}));
}

SlowlyVarying SlowlyVarying::product(const SlowlyVarying& left, const SlowlyVarying& right) {
  return SlowlyVarying(
      std::make_shared<const Node>(Node{Kind::Product, 0.0, left.node_, right.node_}));
}

SlowlyVarying::Kind SlowlyVarying::kind() const { return node_->kind; }

namespace {

double eval_node(const SlowlyVarying::Node& n, double y) {
  switch (n.kind) {
    case SlowlyVarying::Kind::Constant:
      return n.value;
    case SlowlyVarying::Kind::LogPower:
      return std::pow(1.0 + std::log1p(y), n.value);
    case SlowlyVarying::Kind::IterLogPower:
      return std::pow(1.0 + std::log1p(std::log1p(y)), n.value);
    case SlowlyVarying::Kind::Product:
      return eval_node(*n.left, y) * eval_node(*n.right, y);
  }
  return 1.0;
}

double log_derivative_node(const SlowlyVarying::Node& n, double y) {
  switch (n.kind) {
    case SlowlyVarying::Kind::Constant:
      return 0.0;
    case SlowlyVarying::Kind::LogPower:
      return n.value / ((1.0 + std::log1p(y)) * (1.0 + y));
    case SlowlyVarying::Kind::IterLogPower: {
      const double l1 = std::log1p(y);
      return n.value / ((1.0 + std::log1p(l1)) * (1.0 + l1) * (1.0 + y));
    }
    case SlowlyVarying::Kind::Product:
      return log_derivative_node(*n.left, y) + log_derivative_node(*n.right, y);
  }
  return 0.0;
}

template <class F>
void visit_leaves(const SlowlyVarying::Node& n, F&& f) {
  if (n.kind == SlowlyVarying::Kind::Product) {
    visit_leaves(*n.left, f);
    visit_leaves(*n.right, f);
  } else {
    f(n);
  }
}

void format_double(std::ostringstream& os, double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  os.write(buf, res.ptr - buf);
}

void print_node(std::ostringstream& os, const SlowlyVarying::Node& n) {
  switch (n.kind) {
    case SlowlyVarying::Kind::Constant:
      os << "c(";
      format_double(os, n.value);
      os << ")";
      break;
    case SlowlyVarying::Kind::LogPower:
      os << "lp(";
      format_double(os, n.value);
      os << ")";
      break;
    case SlowlyVarying::Kind::IterLogPower:
      os << "ilp(";
      format_double(os, n.value);
      os << ")";
      break;
    case SlowlyVarying::Kind::Product:
      print_node(os, *n.left);
      os << "*";
      print_node(os, *n.right);
      break;
  }
}

}  // namespace

double SlowlyVarying::eval(double y) const {
  if (!std::isfinite(y) || y < 0.0) {
    throw DomainError("slowly varying function evaluated at non-finite or negative argument");
  }
  return eval_node(*node_, y);
}

double SlowlyVarying::log_derivative(double y) const {
  if (!std::isfinite(y) || y < 0.0) {
    throw DomainError("slowly varying function evaluated at non-finite or negative argument");
  }
  return log_derivative_node(*node_, y);
}

double SlowlyVarying::log_exponent() const {
  double s = 0.0;
  visit_leaves(*node_, [&](const Node& n) {
    if (n.kind == Kind::LogPower) s += n.value;
  });
  return s;
}

double SlowlyVarying::iter_log_exponent() const {
  double s = 0.0;
  visit_leaves(*node_, [&](const Node& n) {
    if (n.kind == Kind::IterLogPower) s += n.value;
  });
  return s;
}

double SlowlyVarying::constant_factor() const {
  double c = 1.0;
  visit_leaves(*node_, [&](const Node& n) {
    if (n.kind == Kind::Constant) c *= n.value;
  });
  return c;
}

bool SlowlyVarying::is_constant() const {
  bool constant = true;
  visit_leaves(*node_, [&](const Node& n) {
    if (n.kind != Kind::Constant && n.value != 0.0) constant = false;
  });
  return constant;
}

std::string SlowlyVarying::to_string() const {
  std::ostringstream os;
  print_node(os, *node_);
  return os.str();
}

bool limit_at_infinity_is_zero(const SlowlyVarying& v) {
  const double lp = v.log_exponent();
  if (lp < 0.0) return true;
  if (lp > 0.0) return false;
  return v.iter_log_exponent() < 0.0;
}

// --- parser -----------------------------------------------------------------

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  SlowlyVarying parse() {
    skip_ws();
    if (pos_ == text_.size()) fail("empty expression");
    SlowlyVarying result = factor();
    skip_ws();
    while (pos_ < text_.size() && text_[pos_] == '*') {
      ++pos_;
      result = result * factor();
      skip_ws();
    }
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return result;
  }

 private:
  SlowlyVarying factor() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name.empty()) fail("expected one of c, lp, ilp");
    if (name != "c" && name != "lp" && name != "ilp") {
      fail_at(start, "unknown function '" + std::string(name) + "'");
    }
    expect('(');
    const double value = number();
    expect(')');
    try {
      if (name == "c") return SlowlyVarying::constant(value);
      if (name == "lp") return SlowlyVarying::log_power(value);
      return SlowlyVarying::iter_log_power(value);
    } catch (const DomainError& e) {
      fail_at(start, e.what());
    }
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '+') ++pos_;
    double value = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) fail_at(start, "expected a number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) { fail_at(pos_, what); }

  [[noreturn]] void fail_at(std::size_t at, const std::string& what) {
    std::string token = at < text_.size() ? std::string(text_.substr(at, 8)) : "<end>";
    throw ParseError("V-expression \"" + std::string(text_) + "\": " + what + " at column " +
                     std::to_string(at + 1) + " near '" + token + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

SlowlyVarying SlowlyVarying::parse(std::string_view text) { return Parser(text).parse(); }

}  // namespace mdt
