#include "mint/io.hpp"

#include <cstring>
#include <fstream>

namespace mint {

namespace {

constexpr char kMagic[4] = {'M', 'A', 'R', 'R'};
constexpr uint32_t kVersion = 1;

size_t dtype_size(DType t) {
    switch (t) {
        case DType::F64: return 8;
        case DType::F32: return 4;
        case DType::I64: return 8;
        case DType::U32: return 4;
        case DType::U8: return 1;
    }
    throw RuntimeFailure("unknown dtype");
}

template <typename T>
void append_pod(std::vector<uint8_t>& buf, T v) {
    // Build is little-endian x86; memcpy writes LE bytes directly.
    const auto* p = reinterpret_cast<const uint8_t*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T>
T read_pod(const std::vector<uint8_t>& buf, size_t& off) {
    if (off + sizeof(T) > buf.size()) throw ValidationError("array container truncated");
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

const ArrayEntry& ArrayArchive::entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ValidationError("archive entry not found: " + name);
    return it->second;
}

void ArrayArchive::put_f64(const std::string& name, const Mat& m) {
    ArrayEntry e;
    e.dtype = DType::F64;
    e.shape = {static_cast<uint64_t>(m.rows()), static_cast<uint64_t>(m.cols())};
    e.raw.resize(static_cast<size_t>(m.size()) * 8);
    // Row-major on disk.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    std::memcpy(e.raw.data(), rm.data(), e.raw.size());
    entries_[name] = std::move(e);
}

void ArrayArchive::put_f32(const std::string& name, const MatF& m) {
    ArrayEntry e;
    e.dtype = DType::F32;
    e.shape = {static_cast<uint64_t>(m.rows()), static_cast<uint64_t>(m.cols())};
    e.raw.resize(static_cast<size_t>(m.size()) * 4);
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    std::memcpy(e.raw.data(), rm.data(), e.raw.size());
    entries_[name] = std::move(e);
}

void ArrayArchive::put_f32_raw(const std::string& name, const std::vector<float>& v,
                               const std::vector<uint64_t>& shape) {
    uint64_t n = 1;
    for (uint64_t d : shape) n *= d;
    require(n == v.size(), "shape does not match value count for " + name);
    ArrayEntry e;
    e.dtype = DType::F32;
    e.shape = shape;
    e.raw.resize(v.size() * 4);
    std::memcpy(e.raw.data(), v.data(), e.raw.size());
    entries_[name] = std::move(e);
}

void ArrayArchive::put_vec_f64(const std::string& name, const Vec& v) {
    ArrayEntry e;
    e.dtype = DType::F64;
    e.shape = {static_cast<uint64_t>(v.size())};
    e.raw.resize(static_cast<size_t>(v.size()) * 8);
    std::memcpy(e.raw.data(), v.data(), e.raw.size());
    entries_[name] = std::move(e);
}

void ArrayArchive::put_u32(const std::string& name, const std::vector<uint32_t>& v) {
    ArrayEntry e;
    e.dtype = DType::U32;
    e.shape = {v.size()};
    e.raw.resize(v.size() * 4);
    std::memcpy(e.raw.data(), v.data(), e.raw.size());
    entries_[name] = std::move(e);
}

void ArrayArchive::put_u8(const std::string& name, const std::vector<uint8_t>& v) {
    ArrayEntry e;
    e.dtype = DType::U8;
    e.shape = {v.size()};
    e.raw = v;
    entries_[name] = std::move(e);
}

void ArrayArchive::put_i64(const std::string& name, const std::vector<int64_t>& v) {
    ArrayEntry e;
    e.dtype = DType::I64;
    e.shape = {v.size()};
    e.raw.resize(v.size() * 8);
    std::memcpy(e.raw.data(), v.data(), e.raw.size());
    entries_[name] = std::move(e);
}

void ArrayArchive::put_text(const std::string& name, const std::string& text) {
    std::vector<uint8_t> bytes(text.begin(), text.end());
    put_u8(name, bytes);
}

Mat ArrayArchive::get_f64(const std::string& name) const {
    const ArrayEntry& e = entry(name);
    require(e.dtype == DType::F64, name + ": dtype mismatch, expected f64");
    require(e.shape.size() == 2, name + ": expected 2-d array");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
        static_cast<Index>(e.shape[0]), static_cast<Index>(e.shape[1]));
    std::memcpy(rm.data(), e.raw.data(), e.raw.size());
    return rm;
}

MatF ArrayArchive::get_f32(const std::string& name) const {
    const ArrayEntry& e = entry(name);
    require(e.dtype == DType::F32, name + ": dtype mismatch, expected f32");
    require(e.shape.size() == 2, name + ": expected 2-d array");
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
        static_cast<Index>(e.shape[0]), static_cast<Index>(e.shape[1]));
    std::memcpy(rm.data(), e.raw.data(), e.raw.size());
    return rm;
}

std::vector<float> ArrayArchive::get_f32_raw(const std::string& name, std::vector<uint64_t>* shape) const {
    const ArrayEntry& e = entry(name);
    require(e.dtype == DType::F32, name + ": dtype mismatch, expected f32");
    std::vector<float> v(e.count());
    std::memcpy(v.data(), e.raw.data(), e.raw.size());
    if (shape) *shape = e.shape;
    return v;
}

Vec ArrayArchive::get_vec_f64(const std::string& name) const {
    const ArrayEntry& e = entry(name);
    require(e.dtype == DType::F64, name + ": dtype mismatch, expected f64");
    require(e.shape.size() == 1, name + ": expected 1-d array");
    Vec v(static_cast<Index>(e.shape[0]));
    std::memcpy(v.data(), e.raw.data(), e.raw.size());
    return v;
}

std::vector<uint32_t> ArrayArchive::get_u32(const std::string& name) const {
    const ArrayEntry& e = entry(name);
    require(e.dtype == DType::U32, name + ": dtype mismatch, expected u32");
    std::vector<uint32_t> v(e.count());
    std::memcpy(v.data(), e.raw.data(), e.raw.size());
    return v;
}

std::vector<uint8_t> ArrayArchive::get_u8(const std::string& name) const {
    const ArrayEntry& e = entry(name);
    require(e.dtype == DType::U8, name + ": dtype mismatch, expected u8");
    return e.raw;
}

std::vector<int64_t> ArrayArchive::get_i64(const std::string& name) const {
    const ArrayEntry& e = entry(name);
    require(e.dtype == DType::I64, name + ": dtype mismatch, expected i64");
    std::vector<int64_t> v(e.count());
    std::memcpy(v.data(), e.raw.data(), e.raw.size());
    return v;
}

std::string ArrayArchive::get_text(const std::string& name) const {
    std::vector<uint8_t> b = get_u8(name);
    return std::string(b.begin(), b.end());
}

void ArrayArchive::save(const std::string& path) const {
    std::vector<uint8_t> buf;
    buf.insert(buf.end(), kMagic, kMagic + 4);
    append_pod(buf, kVersion);
    append_pod(buf, static_cast<uint32_t>(entries_.size()));
    for (const auto& [name, e] : entries_) {
        append_pod(buf, static_cast<uint32_t>(name.size()));
        buf.insert(buf.end(), name.begin(), name.end());
        append_pod(buf, static_cast<uint8_t>(e.dtype));
        append_pod(buf, static_cast<uint8_t>(e.shape.size()));
        for (uint64_t d : e.shape) append_pod(buf, d);
        buf.insert(buf.end(), e.raw.begin(), e.raw.end());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw RuntimeFailure("write failed: " + path);
}

ArrayArchive ArrayArchive::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open: " + path);
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    size_t off = 0;
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw ValidationError("not an array container: " + path);
    off = 4;
    uint32_t version = read_pod<uint32_t>(buf, off);
    if (version != kVersion) throw ValidationError("unsupported container version in " + path);
    uint32_t count = read_pod<uint32_t>(buf, off);

    ArrayArchive a;
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t name_len = read_pod<uint32_t>(buf, off);
        if (off + name_len > buf.size()) throw ValidationError("array container truncated");
        std::string name(buf.begin() + static_cast<long>(off), buf.begin() + static_cast<long>(off + name_len));
        off += name_len;
        ArrayEntry e;
        e.dtype = static_cast<DType>(read_pod<uint8_t>(buf, off));
        uint8_t ndim = read_pod<uint8_t>(buf, off);
        e.shape.resize(ndim);
        for (uint8_t d = 0; d < ndim; ++d) e.shape[d] = read_pod<uint64_t>(buf, off);
        size_t nbytes = static_cast<size_t>(e.count()) * dtype_size(e.dtype);
        if (off + nbytes > buf.size()) throw ValidationError("array container truncated");
        e.raw.assign(buf.begin() + static_cast<long>(off), buf.begin() + static_cast<long>(off + nbytes));
        off += nbytes;
        a.entries_[name] = std::move(e);
    }
    return a;
}

}  // namespace mint
