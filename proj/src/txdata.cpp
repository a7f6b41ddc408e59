#include "fraudlab/txdata.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fraudlab/error.hpp"

namespace fraudlab {

std::string_view to_string(TxType type) {
  switch (type) {
    case TxType::kCashIn: return "CASH_IN";
    case TxType::kCashOut: return "CASH_OUT";
    case TxType::kDebit: return "DEBIT";
    case TxType::kPayment: return "PAYMENT";
    case TxType::kTransfer: return "TRANSFER";
  }
  return "?";
}

std::optional<TxType> parse_tx_type(std::string_view text) {
  if (text == "CASH_IN" || text == "CASH-IN") return TxType::kCashIn;
  if (text == "CASH_OUT" || text == "CASH-OUT") return TxType::kCashOut;
  if (text == "DEBIT") return TxType::kDebit;
  if (text == "PAYMENT") return TxType::kPayment;
  if (text == "TRANSFER") return TxType::kTransfer;
  return std::nullopt;
}

Dataset::Dataset(std::vector<Transaction> rows) : rows_(std::move(rows)) {}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Transaction> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(rows_[i]);
  return Dataset(std::move(out));
}

std::string format_decimal(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

namespace {

// Splits on commas without allocating; PaySim fields are never quoted.
std::size_t split_fields(std::string_view line,
                         std::array<std::string_view, 16>& fields) {
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (count == fields.size()) return count + 1;
    if (comma == std::string_view::npos) {
      fields[count++] = line.substr(start);
      return count;
    }
    fields[count++] = line.substr(start, comma - start);
    start = comma + 1;
  }
}

[[noreturn]] void row_error(std::size_t line_no, std::string_view column,
                            std::string_view detail) {
  throw Error(Errc::kRow, "line " + std::to_string(line_no) + ", column " +
                              std::string(column) + ": " + std::string(detail));
}

double parse_amount(std::string_view text, std::size_t line_no,
                    std::string_view column) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    row_error(line_no, column, "not a number: '" + std::string(text) + "'");
  }
  if (!(value >= 0.0)) row_error(line_no, column, "negative amount");
  return value;
}

std::int64_t parse_int(std::string_view text, std::size_t line_no,
                       std::string_view column) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    row_error(line_no, column, "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::uint8_t parse_flag(std::string_view text, std::size_t line_no,
                        std::string_view column) {
  const auto v = parse_int(text, line_no, column);
  if (v != 0 && v != 1) row_error(line_no, column, "expected 0 or 1");
  return static_cast<std::uint8_t>(v);
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

Dataset parse_csv(std::string_view text) {
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    line = strip_cr(text.substr(pos, nl - pos));
    pos = nl + 1;
    return true;
  };

  std::string_view header;
  if (!next_line(header)) {
    throw Error(Errc::kSchema, "missing header line");
  }
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") {
    header.remove_prefix(3);
  }
  std::array<std::string_view, 16> fields;
  const auto n_header = split_fields(header, fields);
  // position[c] = index in the file of canonical column c
  std::array<std::size_t, 11> position{};
  for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
    bool found = false;
    for (std::size_t f = 0; f < std::min(n_header, fields.size()); ++f) {
      if (fields[f] == kCsvColumns[c]) {
        position[c] = f;
        found = true;
        break;
      }
    }
    if (!found) {
      throw Error(Errc::kSchema,
                  "missing column '" + std::string(kCsvColumns[c]) + "'");
    }
  }
  if (n_header != kCsvColumns.size()) {
    for (std::size_t f = 0; f < std::min(n_header, fields.size()); ++f) {
      bool known = false;
      for (auto c : kCsvColumns) known = known || fields[f] == c;
      if (!known) {
        throw Error(Errc::kSchema,
                    "unexpected column '" + std::string(fields[f]) + "'");
      }
    }
    throw Error(Errc::kSchema, "header must name exactly 11 columns");
  }

  std::vector<Transaction> rows;
  rows.reserve(std::count(text.begin(), text.end(), '\n'));
  std::string_view line;
  std::size_t line_no = 1;
  while (next_line(line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto n = split_fields(line, fields);
    if (n != kCsvColumns.size()) {
      row_error(line_no, "*", "expected 11 fields, found " + std::to_string(n));
    }
    auto field = [&](std::size_t c) { return fields[position[c]]; };
    Transaction t;
    t.step = parse_int(field(0), line_no, kCsvColumns[0]);
    if (t.step < 0) row_error(line_no, kCsvColumns[0], "negative step");
    auto type = parse_tx_type(field(1));
    if (!type) {
      row_error(line_no, kCsvColumns[1],
                "unknown type '" + std::string(field(1)) + "'");
    }
    t.tx_type = *type;
    t.amount = parse_amount(field(2), line_no, kCsvColumns[2]);
    t.orig_id = std::string(field(3));
    t.old_balance_orig = parse_amount(field(4), line_no, kCsvColumns[4]);
    t.new_balance_orig = parse_amount(field(5), line_no, kCsvColumns[5]);
    t.dest_id = std::string(field(6));
    t.old_balance_dest = parse_amount(field(7), line_no, kCsvColumns[7]);
    t.new_balance_dest = parse_amount(field(8), line_no, kCsvColumns[8]);
    t.is_fraud = parse_flag(field(9), line_no, kCsvColumns[9]);
    t.is_flagged_fraud = parse_flag(field(10), line_no, kCsvColumns[10]);
    rows.push_back(std::move(t));
  }
  return Dataset(std::move(rows));
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

std::string to_csv(const Dataset& dataset) {
  std::string out;
  out.reserve(64 + dataset.size() * 110);
  for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
    if (c) out += ',';
    out += kCsvColumns[c];
  }
  out += '\n';
  for (const auto& t : dataset.rows()) {
    out += std::to_string(t.step);
    out += ',';
    out += to_string(t.tx_type);
    out += ',';
    out += format_decimal(t.amount);
    out += ',';
    out += t.orig_id;
    out += ',';
    out += format_decimal(t.old_balance_orig);
    out += ',';
    out += format_decimal(t.new_balance_orig);
    out += ',';
    out += t.dest_id;
    out += ',';
    out += format_decimal(t.old_balance_dest);
    out += ',';
    out += format_decimal(t.new_balance_dest);
    out += ',';
    out += t.is_fraud ? '1' : '0';
    out += ',';
    out += t.is_flagged_fraud ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  const auto text = to_csv(dataset);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::kIo, "write failed for " + path.string());
}

}  // namespace fraudlab
