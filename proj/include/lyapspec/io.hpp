#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lyap {

// Shortest text form that round-trips a double exactly; used everywhere a
// number reaches a file so that repeated runs are byte-identical.
std::string fmt_double(double x);
// Fixed 12-significant-digit form for human-facing CSV columns.
std::string fmt_g12(double x);

// Writes via a temp file + rename so partially written artifacts never
// appear under the final name.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

void ensure_directory(const std::string& path);

struct CsvWriter {
    explicit CsvWriter(std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);
    void save(const std::string& path) const;
    std::string text;
    size_t columns;
};

// splitmix64: tiny deterministic generator, identical on every platform.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}
    uint64_t next();
    double uniform();                    // [0, 1)
    double uniform(double lo, double hi);
    int uniform_int(int lo, int hi);     // inclusive bounds

  private:
    uint64_t state_;
};

}  // namespace lyap
