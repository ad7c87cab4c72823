#include "adavol/data_ingest.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "adavol/errors.hpp"

namespace adavol {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(begin, end - begin + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError(1, "missing column '" + name + "'");
}

bool parse_double(const std::string& text, double& value) {
  if (text.empty()) return false;
  std::size_t used = 0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == text.size();
}

Date parse_date(const std::string& text, const std::string& format, std::size_t row) {
  std::tm tm{};
  std::istringstream is(text);
  is >> std::get_time(&tm, format.c_str());
  if (is.fail()) throw ParseError(row, "cannot parse date '" + text + "'");
  const std::chrono::year_month_day ymd{std::chrono::year{tm.tm_year + 1900},
                                        std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
                                        std::chrono::day{static_cast<unsigned>(tm.tm_mday)}};
  if (!ymd.ok()) throw ParseError(row, "invalid calendar date '" + text + "'");
  return Date{ymd};
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (const char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
      field.push_back(ch);
    } else if (ch == delimiter && !quoted) {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  fields.push_back(trim(field));
  return fields;
}

PriceSeries parse_prices(std::istream& in, const CsvFormat& format) {
  std::string line;
  if (!std::getline(in, line)) throw EmptySeries("price file is empty");
  const auto header = split_csv_line(line, format.delimiter);
  const std::size_t date_col = column_index(header, format.date_column);
  const std::size_t close_col = column_index(header, format.close_column);

  PriceSeries series;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line, format.delimiter);
    if (fields.size() <= std::max(date_col, close_col)) {
      throw ParseError(row, "expected at least " + std::to_string(std::max(date_col, close_col) + 1) +
                                " fields");
    }
    double close = 0.0;
    if (!parse_double(fields[close_col], close) || !std::isfinite(close)) {
      throw ParseError(row, "missing or non-numeric close '" + fields[close_col] + "'");
    }
    if (close <= 0.0) throw ParseError(row, "close must be positive, got " + fields[close_col]);
    const Date date = parse_date(fields[date_col], format.date_format, row);
    if (!series.dates.empty() && date <= series.dates.back()) {
      throw NonMonotoneDates("row " + std::to_string(row) + ": date " + fields[date_col] +
                             " does not follow " + format_date(series.dates.back()));
    }
    series.dates.push_back(date);
    series.close.push_back(close);
  }
  if (series.close.empty()) throw EmptySeries("price file has no data rows");
  return series;
}

PriceSeries load_prices(const std::filesystem::path& path, const CsvFormat& format) {
  auto in = open(path);
  return parse_prices(in, format);
}

ReturnSeries log_returns(const PriceSeries& prices) {
  if (prices.close.size() < 2) throw EmptySeries("log returns need at least two prices");
  ReturnSeries out;
  out.returns.reserve(prices.close.size() - 1);
  for (std::size_t t = 1; t < prices.close.size(); ++t) {
    out.returns.push_back(std::log(prices.close[t]) - std::log(prices.close[t - 1]));
  }
  if (prices.dates.size() == prices.close.size()) {
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  }
  return out;
}

std::vector<double> prices_from_returns(double first_price, std::span<const double> returns) {
  std::vector<double> prices;
  prices.reserve(returns.size() + 1);
  prices.push_back(first_price);
  const double log_first = std::log(first_price);
  double cumulative = 0.0;
  for (const double r : returns) {
    cumulative += r;
    prices.push_back(std::exp(log_first + cumulative));
  }
  return prices;
}

std::vector<double> parse_column(std::istream& in, const std::string& column, char delimiter) {
  std::string line;
  if (!std::getline(in, line)) throw EmptySeries("file is empty");
  const std::size_t col = column_index(split_csv_line(line, delimiter), column);
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line, delimiter);
    double value = 0.0;
    if (col >= fields.size() || !parse_double(fields[col], value) || !std::isfinite(value)) {
      throw ParseError(row, "missing or non-numeric value in column '" + column + "'");
    }
    values.push_back(value);
  }
  if (values.empty()) throw EmptySeries("no data rows");
  return values;
}

std::vector<double> load_column(const std::filesystem::path& path, const std::string& column,
                                char delimiter) {
  auto in = open(path);
  return parse_column(in, column, delimiter);
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace adavol
