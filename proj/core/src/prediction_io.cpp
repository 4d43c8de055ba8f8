// SPDX-License-Identifier: Apache-2.0
#include "regnas/prediction_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "regnas/errors.hpp"

namespace regnas {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'G', 'N', 'S', 'P', 'R', 'E', 'D'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.put(static_cast<char>(static_cast<std::uint64_t>(v) >> (8 * i) & 0xff));
  }
}

template <typename T>
T get_le(std::istream& in, const std::string& what) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == EOF) throw ConfigError("truncated prediction file while reading " + what);
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(v);
}

std::vector<NamedCorrectness> read_binary(std::istream& in, const std::string& label) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kVersion) {
    throw ConfigError(label + ": unsupported prediction format version " + std::to_string(version));
  }
  const auto models = get_le<std::uint32_t>(in, "model count");
  const auto n = get_le<std::uint64_t>(in, "sample count");
  if (n == 0) throw ConfigError(label + ": sample count must be positive");
  std::vector<NamedCorrectness> out;
  for (std::uint32_t m = 0; m < models; ++m) {
    const auto len = get_le<std::uint32_t>(in, "name length");
    std::string name(len, '\0');
    in.read(name.data(), len);
    std::vector<std::uint8_t> bytes((n + 7) / 8);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw ConfigError(label + ": truncated bitmap for model " + std::to_string(m));
    out.push_back({std::move(name), CorrectnessVector::from_packed(n, bytes)});
  }
  if (in.peek() != EOF) throw ConfigError(label + ": trailing bytes after last model");
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

long long parse_integer(const std::string& s, const std::string& label) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(label + ": expected an integer, got '" + s + "'");
  }
}

std::vector<NamedCorrectness> read_csv(std::istream& in, const std::filesystem::path& path) {
  const std::string label = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(label + ": empty CSV");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "sample_id") {
    throw ConfigError(label + ": CSV header must start with sample_id");
  }
  const bool label_level = header.size() == 3 && header[1] == "label" &&
                           (header[2] == "pred" || header[2] == "prediction");

  std::vector<std::vector<int>> columns(label_level ? 1 : header.size() - 1);
  std::vector<long long> ids;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ConfigError(label + ": row has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    }
    ids.push_back(parse_integer(cells[0], label));
    if (label_level) {
      columns[0].push_back(cells[1] == cells[2] ? 1 : 0);
      continue;
    }
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const long long v = parse_integer(cells[c], label);
      if (v != 0 && v != 1) throw ConfigError(label + ": correctness cells must be 0 or 1");
      columns[c - 1].push_back(static_cast<int>(v));
    }
  }
  const std::size_t n = ids.size();
  if (n == 0) throw ConfigError(label + ": CSV has no samples");
  std::vector<std::size_t> row_of(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= n || row_of[ids[r]] != n) {
      throw ConfigError(label + ": sample ids must be 0..N-1, each exactly once");
    }
    row_of[static_cast<std::size_t>(ids[r])] = r;
  }

  std::vector<NamedCorrectness> out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    CorrectnessVector bits(n);
    for (std::size_t i = 0; i < n; ++i) bits.set(i, columns[c][row_of[i]] == 1);
    std::string name = label_level || header[c + 1] == "correct" ? path.stem().string()
                                                                 : header[c + 1];
    out.push_back({std::move(name), std::move(bits)});
  }
  return out;
}

}  // namespace

std::vector<NamedCorrectness> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::array<char, 8> head{};
  in.read(head.data(), head.size());
  const bool binary = in.gcount() == 8 && head == kMagic;
  in.clear();
  in.seekg(0);
  auto models = binary ? read_binary(in, path.string()) : read_csv(in, path);
  for (const auto& m : models) {
    if (m.bits.size() != models.front().bits.size()) {
      throw EvaluatorError(path.string() + ": models differ in sample count");
    }
  }
  return models;
}

void write_predictions_binary(const std::filesystem::path& path,
                              const std::vector<NamedCorrectness>& models) {
  if (models.empty()) throw ConfigError("nothing to write");
  const std::size_t n = models.front().bits.size();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(models.size()));
  put_le<std::uint64_t>(out, n);
  for (const auto& m : models) {
    if (m.bits.size() != n) throw EvaluatorError("models differ in sample count");
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.name.size()));
    out.write(m.name.data(), static_cast<std::streamsize>(m.name.size()));
    const auto bytes = m.bits.packed();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

void write_predictions_csv(const std::filesystem::path& path,
                           const std::vector<NamedCorrectness>& models) {
  if (models.empty()) throw ConfigError("nothing to write");
  const std::size_t n = models.front().bits.size();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "sample_id";
  for (const auto& m : models) {
    if (m.bits.size() != n) throw EvaluatorError("models differ in sample count");
    if (m.name.find(',') != std::string::npos) {
      throw ConfigError("model name '" + m.name + "' contains a comma; use the binary format");
    }
    out << ',' << m.name;
  }
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << i;
    for (const auto& m : models) out << ',' << (m.bits.get(i) ? 1 : 0);
    out << '\n';
  }
}

}  // namespace regnas
