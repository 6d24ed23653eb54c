#include "sgdstab/io_util.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace sgdstab {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  file.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!file) {
    throw IoError("write to '" + path + "' failed");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw IoError("cannot open '" + path + "'");
  }
  std::ostringstream out;
  out << file.rdbuf();
  return out.str();
}

}  // namespace sgdstab
