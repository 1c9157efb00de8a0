#include "mpnls/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mpnls {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& header_json,
                     const std::vector<std::string>& columns)
    : path_(path) {
    buffer_ += "# ";
    buffer_ += kArtifactVersion;
    buffer_ += "\n# config = ";
    buffer_ += header_json;
    buffer_ += "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) buffer_ += ",";
        buffer_ += columns[i];
    }
    buffer_ += "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) buffer_ += ",";
        buffer_ += format_double(values[i]);
    }
    buffer_ += "\n";
}

void CsvWriter::raw_row(const std::string& line) {
    buffer_ += line;
    buffer_ += "\n";
}

void CsvWriter::close() {
    if (!open_) return;
    std::ofstream out(path_, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path_);
    out << buffer_;
    open_ = false;
}

CsvWriter::~CsvWriter() {
    try {
        close();
    } catch (...) {
    }
}

void write_f64(const std::string& path, const std::vector<const Vec*>& fields) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const Vec* f : fields) {
        out.write(reinterpret_cast<const char*>(f->data()),
                  static_cast<std::streamsize>(f->size() * sizeof(double)));
    }
}

void write_sidecar(const std::string& path, const std::string& json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << json << "\n";
}

void write_pgm(const std::string& path, const Vec& field, int nx, int ny) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    double lo = field.minCoeff(), hi = field.maxCoeff();
    if (hi <= lo) hi = lo + 1.0;
    out << "P5\n" << nx << " " << ny << "\n255\n";
    std::string bytes(static_cast<std::size_t>(nx) * ny, '\0');
    for (int i = 0; i < nx * ny; ++i) {
        bytes[i] = static_cast<char>(
            static_cast<unsigned char>(255.0 * (field[i] - lo) / (hi - lo)));
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace mpnls
