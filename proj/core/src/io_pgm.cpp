#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gripflow/errors.hpp"
#include "gripflow/io.hpp"

namespace gripflow {

namespace {

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

[[noreturn]] void fail_at(const std::filesystem::path& path, size_t offset,
                          const std::string& what) {
    throw FormatError(path.string() + ": " + what + " (byte offset " + std::to_string(offset) +
                      ")");
}

// Header token scanner: netpbm whitespace plus '#' comments running to
// end of line.
struct HeaderScanner {
    const std::string& data;
    const std::filesystem::path& path;
    size_t pos = 0;

    void skip_separators() {
        while (pos < data.size()) {
            const char c = data[pos];
            if (c == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
    }

    int next_int(const char* field) {
        skip_separators();
        const size_t start = pos;
        while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') ++pos;
        if (pos == start)
            fail_at(path, start, std::string("expected ") + field);
        long value = 0;
        for (size_t i = start; i < pos; ++i) {
            value = value * 10 + (data[i] - '0');
            if (value > 1'000'000'000) fail_at(path, start, std::string(field) + " too large");
        }
        return static_cast<int>(value);
    }
};

} // namespace

Frame read_frame_pgm(const std::filesystem::path& path) {
    const std::string data = read_file_bytes(path);
    if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
        fail_at(path, 0, "bad magic, expected P5");

    HeaderScanner scan{data, path, 2};
    const int width = scan.next_int("width");
    const int height = scan.next_int("height");
    const int maxval = scan.next_int("maxval");
    if (width < 1 || height < 1) fail_at(path, 2, "dimensions must be positive");
    if (maxval != 255) fail_at(path, scan.pos, "maxval must be 255");
    // Exactly one whitespace byte separates the header from the raster.
    if (scan.pos >= data.size() ||
        (data[scan.pos] != ' ' && data[scan.pos] != '\t' && data[scan.pos] != '\r' &&
         data[scan.pos] != '\n'))
        fail_at(path, scan.pos, "missing whitespace before raster");
    ++scan.pos;

    const size_t expected = static_cast<size_t>(width) * height;
    if (data.size() - scan.pos < expected)
        fail_at(path, data.size(), "truncated raster, expected " + std::to_string(expected) +
                                       " bytes from offset " + std::to_string(scan.pos));

    Frame frame(width, height);
    for (size_t i = 0; i < expected; ++i) {
        frame.intensities[i] = static_cast<unsigned char>(data[scan.pos + i]) / 255.0;
    }
    return frame;
}

void write_frame_pgm(const Frame& frame, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    std::string raster(frame.intensities.size(), '\0');
    for (size_t i = 0; i < frame.intensities.size(); ++i) {
        const double q = std::round(frame.intensities[i] * 255.0);
        raster[i] = static_cast<char>(static_cast<unsigned char>(std::clamp(q, 0.0, 255.0)));
    }
    out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (!out) throw FormatError(path.string() + ": write failed");
}

void write_rgb_ppm(const RgbImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    const size_t n = static_cast<size_t>(image.width) * image.height;
    std::string raster(n * 3, '\0');
    const auto quantize = [](double v) {
        return static_cast<char>(
            static_cast<unsigned char>(std::clamp(std::round(v * 255.0), 0.0, 255.0)));
    };
    for (size_t i = 0; i < n; ++i) {
        raster[i * 3 + 0] = quantize(image.r[i]);
        raster[i * 3 + 1] = quantize(image.g[i]);
        raster[i * 3 + 2] = quantize(image.b[i]);
    }
    out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (!out) throw FormatError(path.string() + ": write failed");
}

std::vector<std::filesystem::path> list_pgm_sequence(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        throw FormatError(dir.string() + ": not a directory");
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    return paths;
}

} // namespace gripflow
