#include "shortrace/event.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "shortrace/errors.hpp"

namespace shortrace {

namespace {

enum class Op { Gt, Lt, Ge, Le };

bool apply(Op op, double a, double b) {
    switch (op) {
        case Op::Gt: return a > b;
        case Op::Lt: return a < b;
        case Op::Ge: return a >= b;
        case Op::Le: return a <= b;
    }
    return false;
}

struct Operand {
    bool is_coordinate = false;
    std::size_t index = 0;
    double value = 0.0;

    double eval(std::span<const double> x) const { return is_coordinate ? x[index] : value; }
};

class Parser {
public:
    Parser(std::string_view text, std::size_t r) : text_(text), r_(r) {}

    Event parse() {
        std::vector<Event> clauses;
        do {
            clauses.push_back(clause());
            skip_space();
        } while (consume('&'));
        skip_space();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return [clauses = std::move(clauses)](std::span<const double> x) {
            return std::all_of(clauses.begin(), clauses.end(), [&](const Event& e) { return e(x); });
        };
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError("event '" + std::string(text_) + "' at column " + std::to_string(pos_ + 1) + ": " +
                              what);
    }

    void skip_space() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool consume(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool keyword(std::string_view word) {
        skip_space();
        if (text_.substr(pos_, word.size()) != word) return false;
        const std::size_t end = pos_ + word.size();
        if (end < text_.size() && std::isalnum(static_cast<unsigned char>(text_[end]))) return false;
        pos_ = end;
        return true;
    }

    double number() {
        skip_space();
        std::size_t start = pos_;
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
        if (start < pos_ && text_[start] == '+') ++start;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                        text_[pos_] == 'e' || text_[pos_] == 'E' ||
                                        ((text_[pos_] == '-' || text_[pos_] == '+') &&
                                         (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
            ++pos_;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec != std::errc{} || ptr != text_.data() + pos_ || start == pos_) fail("expected a number");
        return v;
    }

    std::size_t positive_integer() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec != std::errc{} || start == pos_) fail("expected an integer");
        return v;
    }

    std::optional<Op> op() {
        skip_space();
        if (pos_ >= text_.size()) return std::nullopt;
        const char c = text_[pos_];
        if (c != '>' && c != '<') return std::nullopt;
        ++pos_;
        const bool eq = pos_ < text_.size() && text_[pos_] == '=';
        if (eq) ++pos_;
        if (c == '>') return eq ? Op::Ge : Op::Gt;
        return eq ? Op::Le : Op::Lt;
    }

    Op require_op() {
        const auto o = op();
        if (!o) fail("expected a comparison (>, <, >=, <=)");
        return *o;
    }

    Operand operand() {
        skip_space();
        if (pos_ < text_.size() && (text_[pos_] == 'x' || text_[pos_] == 'X')) {
            ++pos_;
            const std::size_t i = positive_integer();
            if (i < 1 || i > r_) fail("coordinate x" + std::to_string(i) + " out of range 1.." + std::to_string(r_));
            return {true, i - 1, 0.0};
        }
        return {false, 0, number()};
    }

    Event clause() {
        if (keyword("order")) {
            if (r_ < 2) fail("'order' needs r >= 2");
            return ordering_event(r_);
        }
        if (keyword("top")) {
            if (!consume(':')) fail("expected ':' after 'top'");
            const std::size_t s = positive_integer();
            if (s < 1 || s > r_) fail("top:s needs 1 <= s <= r");
            return top_s_event(r_, s);
        }
        if (keyword("norm")) {
            const Op o = require_op();
            const double v = number();
            return [o, v](std::span<const double> x) {
                double s = 0.0;
                for (const double c : x) s += c * c;
                return apply(o, std::sqrt(s), v);
            };
        }
        if (keyword("linf")) {
            const Op o = require_op();
            const double v = number();
            return [o, v](std::span<const double> x) {
                double m = 0.0;
                for (const double c : x) m = std::max(m, std::fabs(c));
                return apply(o, m, v);
            };
        }
        std::vector<Operand> operands{operand()};
        std::vector<Op> ops;
        while (const auto o = op()) {
            ops.push_back(*o);
            operands.push_back(operand());
        }
        if (ops.empty()) fail("expected a comparison");
        return [operands = std::move(operands), ops = std::move(ops)](std::span<const double> x) {
            for (std::size_t i = 0; i < ops.size(); ++i)
                if (!apply(ops[i], operands[i].eval(x), operands[i + 1].eval(x))) return false;
            return true;
        };
    }

    std::string_view text_;
    std::size_t r_;
    std::size_t pos_ = 0;
};

}  // namespace

ParsedEvent parse_event(std::string_view text, std::size_t r) {
    if (r == 0) throw ValidationError("event: dimension must be positive");
    return {std::string(text), Parser(text, r).parse()};
}

}  // namespace shortrace
