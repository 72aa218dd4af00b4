#include "spreadchan/text.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "spreadchan/error.hpp"

namespace spreadchan::text {

void parse_failure(std::string_view text, std::size_t position, const std::string &what) {
    fail(ErrorKind::parse, what + " at position " + std::to_string(position) + " in '" + std::string(text) + "'");
}

Parsed split_kind(std::string_view text) {
    Parsed out;
    const auto colon = text.find(':');
    out.kind = std::string(text.substr(0, colon));
    if (out.kind.empty()) {
        parse_failure(text, 0, "missing kind");
    }
    if (colon == std::string_view::npos) {
        return out;
    }
    std::size_t pos = colon + 1;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) {
            comma = text.size();
        }
        const auto item = text.substr(pos, comma - pos);
        if (item.empty()) {
            parse_failure(text, pos, "empty field");
        }
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            parse_failure(text, pos, "expected key=value");
        }
        out.fields.push_back(Field{std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)), pos + eq + 1});
        pos = comma + 1;
        if (comma == text.size()) {
            break;
        }
    }
    return out;
}

double to_double(std::string_view token, std::size_t position, std::string_view text) {
    const std::string s(token);
    if (s.empty()) {
        parse_failure(text, position, "empty number");
    }
    char *end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        parse_failure(text, position, "invalid number '" + s + "'");
    }
    return v;
}

double to_double(const Field &field, std::string_view text) {
    return to_double(field.value, field.position, text);
}

int to_int(const Field &field, std::string_view text) {
    char *end = nullptr;
    errno = 0;
    const long v = std::strtol(field.value.c_str(), &end, 10);
    if (field.value.empty() || end != field.value.c_str() + field.value.size() || errno == ERANGE ||
        v > 1000000 || v < -1000000) {
        parse_failure(text, field.position, "invalid integer '" + field.value + "'");
    }
    return static_cast<int>(v);
}

std::complex<double> to_complex(const Field &field, std::string_view text) {
    const std::string &s = field.value;
    if (s.empty()) {
        parse_failure(text, field.position, "empty complex number");
    }
    if (s.back() != 'i') {
        return {to_double(field, text), 0.0};
    }
    // a+bi, a-bi, bi, i, -i
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size() - 1; k > 0; --k) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    const std::string real_part = split == std::string::npos ? std::string() : s.substr(0, split);
    std::string imag_part = s.substr(split == std::string::npos ? 0 : split, std::string::npos);
    imag_part.pop_back();
    if (imag_part.empty() || imag_part == "+") {
        imag_part = "1";
    } else if (imag_part == "-") {
        imag_part = "-1";
    }
    const double re = real_part.empty() ? 0.0 : to_double(real_part, field.position, text);
    const double im = to_double(imag_part, field.position + (split == std::string::npos ? 0 : split), text);
    return {re, im};
}

std::string format_number(double value) {
    if (value == 0.0) {
        return "0";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::string format_exact(double value) {
    if (value == 0.0) {
        return "0";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string format_complex(std::complex<double> value) {
    if (value.imag() == 0.0) {
        return format_exact(value.real());
    }
    std::string out = format_exact(value.real());
    if (value.imag() >= 0.0) {
        out += "+";
    }
    return out + format_exact(value.imag()) + "i";
}

}  // namespace spreadchan::text
