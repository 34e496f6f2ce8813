#include <cstring>

#include "rndkit/data.hpp"
#include "rndkit/serialize.hpp"

namespace rndkit {

namespace {

uint32_t read_be32(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

void write_be32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

constexpr size_t kMaxElements = size_t(1) << 31;

}  // namespace

IdxTensor parse_idx(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 4)
        throw IdxError(IdxError::Kind::TruncatedHeader, bytes.size(),
                       "idx: header truncated at offset " + std::to_string(bytes.size()) +
                           " (need 4 magic bytes)");
    if (bytes[0] != 0)
        throw IdxError(IdxError::Kind::BadMagic, 0,
                       "idx: bad magic at offset 0 (expected 0x00, got " +
                           std::to_string(bytes[0]) + ")");
    if (bytes[1] != 0)
        throw IdxError(IdxError::Kind::BadMagic, 1,
                       "idx: bad magic at offset 1 (expected 0x00, got " +
                           std::to_string(bytes[1]) + ")");
    uint8_t dtype = bytes[2];
    if (dtype != kIdxUbyte && dtype != kIdxFloat)
        throw IdxError(IdxError::Kind::UnsupportedDtype, 2,
                       "idx: unsupported dtype code " + std::to_string(dtype) + " at offset 2");
    uint8_t ndims = bytes[3];

    size_t header = 4 + 4 * static_cast<size_t>(ndims);
    if (bytes.size() < header)
        throw IdxError(IdxError::Kind::TruncatedHeader, bytes.size(),
                       "idx: header truncated at offset " + std::to_string(bytes.size()) +
                           " (need " + std::to_string(header) + " header bytes)");

    IdxTensor t;
    t.dtype = dtype;
    size_t count = 1;
    for (int d = 0; d < ndims; ++d) {
        uint32_t dim = read_be32(bytes.data() + 4 + 4 * d);
        t.dims.push_back(dim);
        count *= dim;
        if (count > kMaxElements)
            throw IdxError(IdxError::Kind::DimOverflow, 4 + 4 * static_cast<size_t>(d),
                           "idx: dimension product overflows sane bounds at offset " +
                               std::to_string(4 + 4 * d));
    }

    size_t elem = dtype == kIdxUbyte ? 1 : 4;
    size_t expected = header + count * elem;
    if (bytes.size() < expected)
        throw IdxError(IdxError::Kind::DataSizeMismatch, bytes.size(),
                       "idx: data truncated at offset " + std::to_string(bytes.size()) +
                           " (declared " + std::to_string(count) + " elements ending at offset " +
                           std::to_string(expected) + ")");
    if (bytes.size() > expected)
        throw IdxError(IdxError::Kind::DataSizeMismatch, expected,
                       "idx: trailing bytes start at offset " + std::to_string(expected));

    t.data.resize(count);
    if (dtype == kIdxUbyte) {
        for (size_t i = 0; i < count; ++i) t.data[i] = bytes[header + i];
    } else {
        for (size_t i = 0; i < count; ++i) {
            uint32_t raw = read_be32(bytes.data() + header + 4 * i);
            float f;
            std::memcpy(&f, &raw, 4);
            t.data[i] = f;
        }
    }
    return t;
}

std::vector<uint8_t> encode_idx(const IdxTensor& t) {
    if (t.dtype != kIdxUbyte && t.dtype != kIdxFloat)
        throw IdxError(IdxError::Kind::UnsupportedDtype, 2, "idx: unsupported dtype for encode");
    if (t.data.size() != t.elements())
        throw IdxError(IdxError::Kind::DataSizeMismatch, 4,
                       "idx: data length does not match dims product");
    std::vector<uint8_t> out;
    out.push_back(0);
    out.push_back(0);
    out.push_back(t.dtype);
    out.push_back(static_cast<uint8_t>(t.dims.size()));
    for (uint32_t d : t.dims) write_be32(out, d);
    if (t.dtype == kIdxUbyte) {
        for (double v : t.data) out.push_back(static_cast<uint8_t>(v));
    } else {
        for (double v : t.data) {
            float f = static_cast<float>(v);
            uint32_t raw;
            std::memcpy(&raw, &f, 4);
            write_be32(out, raw);
        }
    }
    return out;
}

IdxTensor load_idx_file(const std::string& path) { return parse_idx(read_file(path)); }

namespace {

const char* kTrainImages = "train-images-idx3-ubyte";
const char* kTrainLabels = "train-labels-idx1-ubyte";
const char* kTestImages = "t10k-images-idx3-ubyte";
const char* kTestLabels = "t10k-labels-idx1-ubyte";

Mat images_to_mat(const IdxTensor& t, const std::string& name) {
    if (t.dims.size() != 3)
        throw std::invalid_argument(name + ": expected 3 dims (count, height, width)");
    int n = static_cast<int>(t.dims[0]);
    int d = static_cast<int>(t.dims[1] * t.dims[2]);
    Mat m(n, d);
    for (size_t i = 0; i < t.data.size(); ++i) m.a[i] = t.data[i] / 255.0;
    return m;
}

std::vector<int> labels_to_vec(const IdxTensor& t, int expected_n, const std::string& name) {
    if (t.dims.size() != 1)
        throw std::invalid_argument(name + ": expected 1 dim");
    if (static_cast<int>(t.dims[0]) != expected_n)
        throw std::invalid_argument(name + ": label count does not match image count");
    std::vector<int> y(t.data.size());
    for (size_t i = 0; i < t.data.size(); ++i) y[i] = static_cast<int>(t.data[i]);
    return y;
}

bool file_exists(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (f) std::fclose(f);
    return f != nullptr;
}

}  // namespace

bool idx_dataset_present(const std::string& dir) {
    for (const char* name : {kTrainImages, kTrainLabels, kTestImages, kTestLabels})
        if (!file_exists(dir + "/" + name)) return false;
    return true;
}

LabeledDataset load_idx_dataset(const std::string& dir) {
    LabeledDataset ds;
    IdxTensor ti = load_idx_file(dir + "/" + kTrainImages);
    IdxTensor tl = load_idx_file(dir + "/" + kTrainLabels);
    IdxTensor vi = load_idx_file(dir + "/" + kTestImages);
    IdxTensor vl = load_idx_file(dir + "/" + kTestLabels);
    ds.train_x = images_to_mat(ti, kTrainImages);
    ds.train_y = labels_to_vec(tl, ds.train_x.rows, kTrainLabels);
    ds.test_x = images_to_mat(vi, kTestImages);
    ds.test_y = labels_to_vec(vl, ds.test_x.rows, kTestLabels);
    int max_label = 0;
    for (int y : ds.train_y) max_label = std::max(max_label, y);
    ds.num_classes = max_label + 1;
    return ds;
}

}  // namespace rndkit
