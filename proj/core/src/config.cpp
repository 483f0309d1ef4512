#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "gripflow/errors.hpp"
#include "gripflow/io.hpp"

namespace gripflow {

namespace {

std::string trim(const std::string& s) {
    const size_t first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const size_t last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

bool KeyValueFile::has(const std::string& key) const { return values.count(key) > 0; }

std::string KeyValueFile::get(const std::string& key, const std::string& fallback) const {
    const auto it = values.find(key);
    if (it == values.end() || it->second.empty()) return fallback;
    return it->second.back();
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
    const auto it = values.find(key);
    if (it == values.end() || it->second.empty()) return fallback;
    const std::string& text = it->second.back();
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        throw ConfigError("key \"" + key + "\": not a number: \"" + text + "\"");
    return v;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
    const auto it = values.find(key);
    if (it == values.end() || it->second.empty()) return fallback;
    const std::string& text = it->second.back();
    char* end = nullptr;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0')
        throw ConfigError("key \"" + key + "\": not an integer: \"" + text + "\"");
    return static_cast<int>(v);
}

KeyValueFile parse_key_value_file(const std::filesystem::path& path,
                                  const std::vector<std::string>& known_keys) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open file");

    KeyValueFile file;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;

        const size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ": line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path.string() + ": line " + std::to_string(line_no) +
                              ": empty key");
        if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end())
            throw ConfigError(path.string() + ": line " + std::to_string(line_no) +
                              ": unknown key \"" + key + "\"");
        file.values[key].push_back(value);
    }
    return file;
}

} // namespace gripflow
