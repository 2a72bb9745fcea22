#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "semreid/core/errors.hpp"
#include "semreid/core/tensor.hpp"

namespace semreid {

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw LoadError("cannot open for writing: " + path);
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void tensor(const Tensor& t) {
    u32(static_cast<std::uint32_t>(t.ndim()));
    for (int d : t.shape()) u32(static_cast<std::uint32_t>(d));
    raw(t.data(), t.numel() * sizeof(double));
  }
  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }

 private:
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw LoadError("cannot open checkpoint: " + path);
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    std::string s(u32(), '\0');
    raw(s.data(), s.size());
    return s;
  }
  Tensor tensor() {
    const int nd = static_cast<int>(u32());
    std::vector<int> shape(nd);
    for (int& d : shape) d = static_cast<int>(u32());
    Tensor t(shape);
    raw(t.data(), t.numel() * sizeof(double));
    return t;
  }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw LoadError("truncated checkpoint: " + path_);
  }

 private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace semreid
