#include "nibec/csv.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "nibec/errors.hpp"

namespace nibec {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc())
    throw NumericalError("format_number: conversion failed");
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc),
      width_(header.size()) {
  if (!out_) throw ConfigError("cannot open output file '" + path + "'");
  emit(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_)
    throw std::invalid_argument("CsvWriter: row width mismatch in '" + path_ + "'");
  emit(cells);
}

void CsvWriter::emit(const std::vector<std::string>& cells) {
  std::string line;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    std::string cell = cells[i];
    std::replace(cell.begin(), cell.end(), ',', ';');
    std::replace(cell.begin(), cell.end(), '\n', ';');
    line += cell;
  }
  line += '\n';
  out_ << line;
}

void CsvWriter::close() {
  out_.flush();
  if (!out_) throw NumericalError("write failed for '" + path_ + "'");
  out_.close();
}

}  // namespace nibec
