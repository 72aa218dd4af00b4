#pragma once

// Small helpers for the `kind:key=value,...` text forms.

#include <complex>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace spreadchan::text {

struct Field {
    std::string key;
    std::string value;
    std::size_t position = 0;  // offset of the value in the original text
};

struct Parsed {
    std::string kind;
    std::vector<Field> fields;
};

/// Splits `kind:k1=v1,k2=v2`. Throws parse error with the offending offset.
Parsed split_kind(std::string_view text);

double to_double(const Field &field, std::string_view text);
int to_int(const Field &field, std::string_view text);
std::complex<double> to_complex(const Field &field, std::string_view text);
double to_double(std::string_view token, std::size_t position, std::string_view text);

/// Fixed-format number rendering shared by every text output: 12 significant digits.
std::string format_number(double value);

/// Round-trip rendering (17 significant digits) for canonical spec strings.
std::string format_exact(double value);
std::string format_complex(std::complex<double> value);

[[noreturn]] void parse_failure(std::string_view text, std::size_t position, const std::string &what);

}  // namespace spreadchan::text
