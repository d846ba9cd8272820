#pragma once

#include <map>
#include <string>

namespace gcrp {

// Flat key=value text: one pair per line, '#' starts a comment, blank lines
// and surrounding whitespace ignored.
std::map<std::string, std::string> parse_kv_text(const std::string& text);
std::map<std::string, std::string> load_kv_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gcrp
