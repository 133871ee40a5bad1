#include "thintact/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace thintact {

namespace {

constexpr std::array<char, 8> kMagic = {'L', 'T', 'M', 'A', 'T', '1', '\n', '\0'};

void put_u32le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& is, const std::string& path, std::size_t offset) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw FormatError(path + ": truncated header at byte " + std::to_string(offset));
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError(path.string() + ": cannot open for reading");
    return is;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError(path.string() + ": cannot open for writing");
    return os;
}

std::uint16_t to_u16(double v) {
    double c = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint16_t>(std::lround(c * 65535.0));
}

}  // namespace

void save_mat(const std::filesystem::path& path, const Mat& m) {
    if (m.empty()) throw InvalidInput("save_mat: empty matrix");
    auto os = open_out(path);
    os.write(kMagic.data(), kMagic.size());
    put_u32le(os, static_cast<std::uint32_t>(m.rows()));
    put_u32le(os, static_cast<std::uint32_t>(m.cols()));
    std::vector<float> buf(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) buf[i] = static_cast<float>(m.data()[i]);
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!os) throw FormatError(path.string() + ": write failed");
}

Mat load_mat(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()))
        throw FormatError(path.string() + ": truncated magic at byte 0");
    if (magic != kMagic)
        throw FormatError(path.string() + ": bad magic at byte 0, expected \"LTMAT1\\n\\0\"");
    std::uint32_t rows = get_u32le(is, path.string(), 8);
    std::uint32_t cols = get_u32le(is, path.string(), 12);
    if (rows == 0 || cols == 0)
        throw InvalidInput(path.string() + ": zero dimension in header");
    std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
    if (count > (std::numeric_limits<std::uint32_t>::max)())
        throw InvalidInput(path.string() + ": dimension overflow");
    std::vector<float> buf(count);
    if (!is.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(count * sizeof(float))))
        throw FormatError(path.string() + ": truncated payload at byte 16");
    Mat m(static_cast<int>(rows), static_cast<int>(cols));
    for (std::uint64_t i = 0; i < count; ++i) m.data()[i] = static_cast<double>(buf[i]);
    return m;
}

namespace {

int read_pnm_int(std::istream& is, const std::string& path) {
    // Skips whitespace and '#' comments per the PNM standard.
    int c = is.peek();
    while (c == '#' || std::isspace(c)) {
        if (c == '#') is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
        else is.get();
        c = is.peek();
    }
    int v = -1;
    if (!(is >> v) || v < 0) throw FormatError(path + ": malformed PNM header");
    return v;
}

void write_pnm_header(std::ostream& os, const char* magic, int w, int h) {
    os << magic << "\n" << w << " " << h << "\n65535\n";
}

std::vector<std::uint16_t> read_pnm_samples(std::istream& is, const std::string& path,
                                            std::size_t count) {
    is.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(count * 2);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
        throw FormatError(path + ": truncated pixel data");
    std::vector<std::uint16_t> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);  // big-endian
    return out;
}

void write_pnm_samples(std::ostream& os, const std::vector<std::uint16_t>& samples) {
    std::vector<unsigned char> raw(samples.size() * 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        raw[2 * i] = static_cast<unsigned char>(samples[i] >> 8);
        raw[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xff);
    }
    os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

}  // namespace

void save_pgm(const std::filesystem::path& path, const Mat& m) {
    auto os = open_out(path);
    write_pnm_header(os, "P5", m.cols(), m.rows());
    std::vector<std::uint16_t> samples(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) samples[i] = to_u16(m.data()[i]);
    write_pnm_samples(os, samples);
    if (!os) throw FormatError(path.string() + ": write failed");
}

Mat load_pgm(const std::filesystem::path& path) {
    auto is = open_in(path);
    char m0 = 0, m1 = 0;
    is.get(m0);
    is.get(m1);
    if (m0 != 'P' || m1 != '5') throw FormatError(path.string() + ": expected P5 magic at byte 0");
    int w = read_pnm_int(is, path.string());
    int h = read_pnm_int(is, path.string());
    int maxval = read_pnm_int(is, path.string());
    if (maxval != 65535) throw FormatError(path.string() + ": expected maxval 65535");
    auto samples = read_pnm_samples(is, path.string(), static_cast<std::size_t>(w) * h);
    Mat m(h, w);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = samples[i] / 65535.0;
    return m;
}

void save_ppm(const std::filesystem::path& path, const ImageRGB& img) {
    img.validate();
    auto os = open_out(path);
    write_pnm_header(os, "P6", img.width(), img.height());
    std::vector<std::uint16_t> samples(img.r.size() * 3);
    for (std::size_t i = 0; i < img.r.size(); ++i) {
        samples[3 * i] = to_u16(img.r.data()[i]);
        samples[3 * i + 1] = to_u16(img.g.data()[i]);
        samples[3 * i + 2] = to_u16(img.b.data()[i]);
    }
    write_pnm_samples(os, samples);
    if (!os) throw FormatError(path.string() + ": write failed");
}

ImageRGB load_ppm(const std::filesystem::path& path) {
    auto is = open_in(path);
    char m0 = 0, m1 = 0;
    is.get(m0);
    is.get(m1);
    if (m0 != 'P' || m1 != '6') throw FormatError(path.string() + ": expected P6 magic at byte 0");
    int w = read_pnm_int(is, path.string());
    int h = read_pnm_int(is, path.string());
    int maxval = read_pnm_int(is, path.string());
    if (maxval != 65535) throw FormatError(path.string() + ": expected maxval 65535");
    auto samples = read_pnm_samples(is, path.string(), static_cast<std::size_t>(w) * h * 3);
    ImageRGB img{Mat(h, w), Mat(h, w), Mat(h, w)};
    for (std::size_t i = 0; i < img.r.size(); ++i) {
        img.r.data()[i] = samples[3 * i] / 65535.0;
        img.g.data()[i] = samples[3 * i + 1] / 65535.0;
        img.b.data()[i] = samples[3 * i + 2] / 65535.0;
    }
    return img;
}

std::string sha256_file(const std::filesystem::path& path) {
    auto is = open_in(path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0)
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(is.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace thintact
