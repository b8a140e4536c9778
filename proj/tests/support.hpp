// Shared helpers for the test suites: scratch directories, moment statistics
// with Monte-Carlo standard errors, and text-file utilities.
#ifndef PROFMIX_TESTS_SUPPORT_HPP
#define PROFMIX_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace testsupport {

// Scratch directory under the system temp root, wiped on entry and exit.
class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() / ("profmix_" + name)) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// Standard error of the sample mean for independent draws.
inline double iid_se(const std::vector<double>& v) {
    return std::sqrt(var_of(v) / static_cast<double>(v.size()));
}

// Standard error of the sample variance from the empirical fourth moment.
inline double var_se(const std::vector<double>& v) {
    const double m = mean_of(v);
    const double s2 = var_of(v);
    double m4 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m4 += d * d * d * d;
    }
    m4 /= static_cast<double>(v.size());
    return std::sqrt(std::max(m4 - s2 * s2, 0.0) / static_cast<double>(v.size()));
}

// Batch-means standard error of the mean for autocorrelated MCMC output.
inline double batch_se(const std::vector<double>& v, int n_batches = 50) {
    const int len = static_cast<int>(v.size()) / n_batches;
    std::vector<double> batch_means(static_cast<std::size_t>(n_batches));
    for (int b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (int i = b * len; i < (b + 1) * len; ++i) s += v[i];
        batch_means[static_cast<std::size_t>(b)] = s / len;
    }
    return std::sqrt(var_of(batch_means) / n_batches);
}

}  // namespace testsupport

#endif
