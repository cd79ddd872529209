#include "ersdp/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ersdp {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

void write_f64_le(const std::string& path, const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<double> read_f64_le(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> out;
  unsigned char bytes[8];
  while (in.read(reinterpret_cast<char*>(bytes), 8)) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(bytes[i]) << (8 * i);
    out.push_back(std::bit_cast<double>(bits));
  }
  if (in.gcount() != 0) throw std::runtime_error("read_f64_le: trailing partial value in " + path);
  return out;
}

void write_matrix_csv(const std::string& path, const MatrixXd& M,
                      const std::vector<std::pair<std::string, std::string>>& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (const auto& [k, v] : header) out << "# " << k << '=' << v << '\n';
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

SparseSymMatrixd read_edge_list(const std::string& path, Index n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list " + path);
  std::vector<SparseSymMatrixd::Triplet> entries;
  Index max_index = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long i = -1, j = -1;
    double w = 1;
    if (!(ls >> i >> j)) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected `i j [weight]`");
    if (!(ls >> w)) {
      if (!ls.eof()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad weight");
      w = 1;
    }
    std::string rest;
    if (ls >> rest) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": trailing tokens");
    if (i < 0 || j < 0) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": negative index");
    max_index = std::max<Index>(max_index, std::max<Index>(i, j));
    entries.emplace_back(int(i), int(j), w);
    if (i != j) entries.emplace_back(int(j), int(i), w);
  }
  if (n == 0) n = max_index + 1;
  if (max_index >= n) throw std::runtime_error("edge list " + path + ": index exceeds dimension");
  return SparseSymMatrixd::from_triplets(n, entries);
}

void write_edge_list(const std::string& path, const SparseSymMatrixd& adjacency) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const auto& m = adjacency.storage();
  for (Index i = 0; i < m.outerSize(); ++i)
    for (SparseSymMatrixd::Storage::InnerIterator it(m, i); it; ++it)
      if (it.col() >= i) out << i << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
}

}  // namespace ersdp
