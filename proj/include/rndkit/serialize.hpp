#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "rndkit/matrix.hpp"

namespace rndkit {

struct SerializeError : std::runtime_error {
    explicit SerializeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Little-endian binary writer for parameter snapshots. Doubles are stored
/// bit-exact, so round-trips are lossless at full precision.
class BinWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u32(uint32_t v);
    void u64(uint64_t v);
    void i32(int32_t v) { u32(static_cast<uint32_t>(v)); }
    void f64(double v);
    void str(const std::string& s);
    void vec(const Vec& v);
    void mat(const Mat& m);
    void bytes(const std::vector<uint8_t>& b);

    const std::vector<uint8_t>& data() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }

private:
    std::vector<uint8_t> buf_;
};

class BinReader {
public:
    explicit BinReader(std::vector<uint8_t> data) : data_(std::move(data)) {}

    uint8_t u8();
    uint32_t u32();
    uint64_t u64();
    int32_t i32() { return static_cast<int32_t>(u32()); }
    double f64();
    std::string str();
    Vec vec();
    Mat mat();
    std::vector<uint8_t> bytes();

    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(size_t n);
    std::vector<uint8_t> data_;
    size_t pos_ = 0;
};

void write_file(const std::string& path, const std::vector<uint8_t>& data);
std::vector<uint8_t> read_file(const std::string& path);

}  // namespace rndkit
