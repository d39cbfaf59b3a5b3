#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <string>
#include <vector>

namespace avatar::oracle {

inline std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Regular files under `root`, relative and sorted.
inline std::vector<std::string> list_files(const std::filesystem::path& root) {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out.push_back(std::filesystem::relative(e.path(), root).generic_string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Relative paths that differ between two trees (missing on one side or
/// different bytes), skipping files whose name is in `ignore`.
inline std::vector<std::string> tree_differences(const std::filesystem::path& a, const std::filesystem::path& b,
                                                 const std::set<std::string>& ignore = {}) {
    const auto fa = list_files(a), fb = list_files(b);
    std::set<std::string> all(fa.begin(), fa.end());
    all.insert(fb.begin(), fb.end());
    std::vector<std::string> diff;
    for (const auto& rel : all) {
        if (ignore.count(std::filesystem::path(rel).filename().string())) continue;
        const auto pa = a / rel, pb = b / rel;
        if (!std::filesystem::exists(pa) || !std::filesystem::exists(pb) || read_bytes(pa) != read_bytes(pb)) {
            diff.push_back(rel);
        }
    }
    return diff;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace avatar::oracle
