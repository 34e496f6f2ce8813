#include "rndkit/serialize.hpp"

#include <fstream>

namespace rndkit {

void BinWriter::u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void BinWriter::u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void BinWriter::f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
}

void BinWriter::str(const std::string& s) {
    u64(s.size());
    buf_.insert(buf_.end(), s.begin(), s.end());
}

void BinWriter::vec(const Vec& v) {
    u64(v.size());
    for (double x : v) f64(x);
}

void BinWriter::mat(const Mat& m) {
    i32(m.rows);
    i32(m.cols);
    for (double x : m.a) f64(x);
}

void BinWriter::bytes(const std::vector<uint8_t>& b) {
    u64(b.size());
    buf_.insert(buf_.end(), b.begin(), b.end());
}

void BinReader::need(size_t n) {
    if (pos_ + n > data_.size()) throw SerializeError("BinReader: truncated input");
}

uint8_t BinReader::u8() {
    need(1);
    return data_[pos_++];
}

uint32_t BinReader::u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_++]) << (8 * i);
    return v;
}

uint64_t BinReader::u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_++]) << (8 * i);
    return v;
}

double BinReader::f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string BinReader::str() {
    const uint64_t n = u64();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
}

Vec BinReader::vec() {
    const uint64_t n = u64();
    Vec v(n);
    for (uint64_t i = 0; i < n; ++i) v[i] = f64();
    return v;
}

Mat BinReader::mat() {
    const int r = i32();
    const int c = i32();
    if (r < 0 || c < 0) throw SerializeError("BinReader: negative matrix dims");
    Mat m(r, c);
    for (auto& x : m.a) x = f64();
    return m;
}

std::vector<uint8_t> BinReader::bytes() {
    const uint64_t n = u64();
    need(n);
    std::vector<uint8_t> b(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return b;
}

void write_file(const std::string& path, const std::vector<uint8_t>& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw SerializeError("cannot open for write: " + path);
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!f) throw SerializeError("write failed: " + path);
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw SerializeError("cannot open for read: " + path);
    f.seekg(0, std::ios::end);
    const auto n = f.tellg();
    f.seekg(0);
    std::vector<uint8_t> data(static_cast<size_t>(n));
    f.read(reinterpret_cast<char*>(data.data()), n);
    if (!f) throw SerializeError("read failed: " + path);
    return data;
}

}  // namespace rndkit
