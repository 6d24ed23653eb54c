#pragma once

#include <string>

#include "sgdstab/common.hpp"

namespace sgdstab {

/// Shortest decimal form that round-trips the double exactly (std::to_chars);
/// locale-independent, '.' separator, "inf"/"nan" for non-finite values.
std::string format_double(double value);

void write_text_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

}  // namespace sgdstab
