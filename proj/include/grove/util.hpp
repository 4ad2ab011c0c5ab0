#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace grove::util {

// FNV-1a, 64-bit. Used for safe-id suffixes; not cryptographic.
std::uint64_t fnv1a64(std::string_view data);

std::string to_hex(std::uint64_t value, int digits);

// Compares two strings in time independent of where they differ.
bool constant_time_equal(std::string_view a, std::string_view b);

// Replaces every {{KEY}} marker with vars.at(KEY); unknown markers are left as-is.
std::string expand_markers(const std::string& text, const std::map<std::string, std::string>& vars);

bool contains_marker(const std::string& text, const std::string& key);

std::string format_iso8601(std::chrono::system_clock::time_point tp);

// Process-unique id with a time component, e.g. "d-18f2c3a9b4-0007".
std::string fresh_id(std::string_view prefix);

// Recursive copy that preserves regular files and directories. Throws on a
// missing source tree.
void copy_tree(const std::filesystem::path& from, const std::filesystem::path& to);

// True when `p` (lexically normalized) is `root` or inside it.
bool path_within(const std::filesystem::path& p, const std::filesystem::path& root);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

}  // namespace grove::util
