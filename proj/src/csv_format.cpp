#include "hql/csv_format.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace hql {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

double parse_double(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\t')) ++begin;
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t' ||
                         text[end - 1] == '\r'))
    --end;
  if (begin < end && text[begin] == '+') ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data() + begin, text.data() + end, value);
  if (begin == end || ec != std::errc{} || ptr != text.data() + end)
    throw std::invalid_argument("not a number: '" + text + "'");
  return value;
}

}  // namespace hql
