#pragma once

#include <string>
#include <vector>

#include "mpnls/grid.hpp"

namespace mpnls {

inline constexpr const char* kArtifactVersion = "mpnls 0.1.0";

// CSV with a deterministic "# key = value" header block before the column
// row; doubles are formatted with %.17g so reruns are byte-identical.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& header_json,
              const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    void raw_row(const std::string& line);
    void close();
    ~CsvWriter();

  private:
    std::string path_;
    std::string buffer_;
    bool open_ = true;
};

std::string format_double(double v);

// raw little-endian float64 dump plus a JSON sidecar describing the layout
void write_f64(const std::string& path, const std::vector<const Vec*>& fields);
void write_sidecar(const std::string& path, const std::string& json);

// binary PGM (P5) of a field scaled to [0, max]
void write_pgm(const std::string& path, const Vec& field, int nx, int ny);

std::string read_text_file(const std::string& path);

} // namespace mpnls
