#include "hopf/parse.hpp"

#include <cctype>
#include <cstdlib>
#include <string>

#include "hopf/errors.hpp"

namespace hopf {

namespace {

class Parser {
public:
    Parser(const std::string& text, int dimension, int cap)
        : text_(text), n_(dimension), cap_(cap) {}

    TruncatedSeries run() {
        TruncatedSeries value = expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return value;
    }

private:
    const std::string& text_;
    int n_;
    int cap_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& message) const {
        throw SyntaxError(message, pos_);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    TruncatedSeries expr() {
        TruncatedSeries value = term();
        while (true) {
            if (eat('+'))
                value += term();
            else if (eat('-'))
                value -= term();
            else
                return value;
        }
    }

    TruncatedSeries term() {
        TruncatedSeries value = unary();
        while (true) {
            if (eat('*')) {
                value *= unary();
            } else if (eat('/')) {
                const std::size_t at = pos_;
                TruncatedSeries divisor = unary();
                try {
                    value *= divisor.reciprocal();
                } catch (const Error&) {
                    throw SyntaxError("division needs a divisor with nonzero constant term", at);
                }
            } else {
                return value;
            }
        }
    }

    TruncatedSeries unary() {
        bool negate = false;
        while (true) {
            if (eat('-'))
                negate = !negate;
            else if (eat('+'))
                continue;
            else
                break;
        }
        TruncatedSeries value = power();
        return negate ? -value : value;
    }

    TruncatedSeries power() {
        TruncatedSeries base = atom();
        if (!eat('^')) return base;
        skip_space();
        bool negative = false;
        if (pos_ < text_.size() && text_[pos_] == '-') {
            negative = true;
            ++pos_;
        }
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            fail("expected integer exponent after '^'");
        long exponent = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            exponent = exponent * 10 + (text_[pos_] - '0');
            if (exponent > 1000) fail("exponent too large");
            ++pos_;
        }
        if (negative) {
            const std::size_t at = pos_;
            try {
                return base.pow(int(-exponent));
            } catch (const Error&) {
                throw SyntaxError("negative power needs a nonzero constant term", at);
            }
        }
        return base.pow(int(exponent));
    }

    TruncatedSeries atom() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            TruncatedSeries value = expr();
            if (!eat(')')) fail("expected ')'");
            return value;
        }
        if (c == 'i' && !is_name_char(pos_ + 1)) {
            ++pos_;
            return TruncatedSeries::constant(n_, cap_, Complex(0.0, 1.0));
        }
        if (c == 'z') return variable();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        fail("expected a number, variable, or '('");
    }

    bool is_name_char(std::size_t at) const {
        return at < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[at])) || text_[at] == '_');
    }

    TruncatedSeries variable() {
        const std::size_t start = pos_;
        ++pos_;  // 'z'
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            pos_ = start;
            fail("expected variable index after 'z'");
        }
        long index = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            index = index * 10 + (text_[pos_] - '0');
            if (index > 1000) break;
            ++pos_;
        }
        if (index < 1 || index > n_) {
            pos_ = start;
            fail("variable index out of range 1.." + std::to_string(n_));
        }
        return TruncatedSeries::variable(n_, cap_, int(index - 1));
    }

    TruncatedSeries number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }
        if (pos_ == start || (pos_ == start + 1 && text_[start] == '.'))
            fail("malformed number");
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // 'e' was not an exponent
            }
        }
        const double value = std::strtod(text_.substr(start, pos_ - start).c_str(), nullptr);
        if (pos_ < text_.size() && text_[pos_] == 'i' && !is_name_char(pos_ + 1)) {
            ++pos_;
            return TruncatedSeries::constant(n_, cap_, Complex(0.0, value));
        }
        return TruncatedSeries::constant(n_, cap_, Complex(value, 0.0));
    }
};

}  // namespace

TruncatedSeries parse_series(const std::string& text, int dimension, int cap) {
    return Parser(text, dimension, cap).run();
}

MapGerm parse_germ(const std::vector<std::string>& expressions, int dimension, int cap) {
    if (int(expressions.size()) != dimension)
        throw Error(ErrorCode::dimension_mismatch,
                    "germ needs exactly one expression per variable");
    std::vector<TruncatedSeries> comps;
    comps.reserve(expressions.size());
    for (const auto& text : expressions) comps.push_back(parse_series(text, dimension, cap));
    return MapGerm(std::move(comps));  // validates constant terms and linear part
}

}  // namespace hopf
