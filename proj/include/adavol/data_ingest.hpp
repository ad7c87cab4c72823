#pragma once

#include <chrono>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace adavol {

using Date = std::chrono::sys_days;

/// Column layout of a closing-price CSV. A header row is required.
struct CsvFormat {
  std::string date_column = "Date";
  std::string close_column = "Close";
  char delimiter = ',';
  /// std::get_time format; ISO-8601 calendar date by default.
  std::string date_format = "%Y-%m-%d";
};

struct PriceSeries {
  std::vector<Date> dates;
  std::vector<double> close;
};

/// r_t = log(P_t / P_{t-1}), dated at the later of the two days.
struct ReturnSeries {
  std::vector<Date> dates;
  std::vector<double> returns;
};

/// Parses and validates a price table. Throws ParseError naming the offending
/// row (1-based, header is row 1), EmptySeries, or NonMonotoneDates.
PriceSeries parse_prices(std::istream& in, const CsvFormat& format = {});
PriceSeries load_prices(const std::filesystem::path& path, const CsvFormat& format = {});

/// Throws EmptySeries for fewer than two prices.
ReturnSeries log_returns(const PriceSeries& prices);

/// Inverse of log_returns: first_price * exp(cumulative sum of returns),
/// including first_price itself.
std::vector<double> prices_from_returns(double first_price, std::span<const double> returns);

/// Reads one numeric column of a headed CSV (e.g. the "return" column of a
/// simulated series). Throws ParseError or EmptySeries.
std::vector<double> parse_column(std::istream& in, const std::string& column,
                                 char delimiter = ',');
std::vector<double> load_column(const std::filesystem::path& path, const std::string& column,
                                char delimiter = ',');

std::string format_date(Date date);

/// Splits one CSV line, trimming whitespace and surrounding double quotes.
std::vector<std::string> split_csv_line(const std::string& line, char delimiter);

}  // namespace adavol
