#include "patchlab/io.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "patchlab/errors.hpp"

namespace patchlab {

namespace {

using nlohmann::json;

void append_array(std::string& out, std::span<const double> v) {
  out += '[';
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (j) out += ',';
    out += format_double(v[j]);
  }
  out += ']';
}

struct Parsed {
  json doc;
  std::string text;
};

Parsed parse_file(const std::string& path) {
  Parsed p;
  p.text = read_text(path);
  try {
    p.doc = json::parse(p.text);
  } catch (const json::parse_error& e) {
    throw MalformedFile(path + ": " + e.what(), e.byte);
  }
  if (!p.doc.is_object()) throw MalformedFile(path + ": top level is not an object", 0);
  return p;
}

std::size_t key_offset(const std::string& text, const std::string& key) {
  std::size_t pos = text.find('"' + key + '"');
  return pos == std::string::npos ? text.size() : pos;
}

std::vector<double> number_array(const Parsed& p, const std::string& path, const std::string& key) {
  auto it = p.doc.find(key);
  if (it == p.doc.end() || !it->is_array())
    throw MalformedFile(path + ": missing array \"" + key + "\"", key_offset(p.text, key));
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number())
      throw MalformedFile(path + ": non-numeric entry in \"" + key + "\"", key_offset(p.text, key));
    out.push_back(v.get<double>());
  }
  return out;
}

double number(const Parsed& p, const std::string& path, const std::string& key) {
  auto it = p.doc.find(key);
  if (it == p.doc.end() || !it->is_number())
    throw MalformedFile(path + ": missing number \"" + key + "\"", key_offset(p.text, key));
  return it->get<double>();
}

std::size_t node_count(const Parsed& p, const std::string& path) {
  auto it = p.doc.find("n");
  if (it == p.doc.end() || !it->is_number_integer() || it->get<long long>() <= 0)
    throw MalformedFile(path + ": \"n\" must be a positive integer", key_offset(p.text, "n"));
  return it->get<std::size_t>();
}

void check_length(const Parsed& p, const std::string& path, const std::string& key,
                  std::size_t got, std::size_t n) {
  if (got != n)
    throw MalformedFile(path + ": \"" + key + "\" has " + std::to_string(got) +
                            " entries, expected " + std::to_string(n),
                        key_offset(p.text, key));
}

LagrangianGrid grid_for(std::size_t n, const Parsed& p, const std::string& path) {
  try {
    return LagrangianGrid(n);
  } catch (const InputError& e) {
    throw MalformedFile(path + ": " + e.what(), key_offset(p.text, "n"));
  }
}

CurveState curve_from(const Parsed& p, const std::string& path) {
  std::size_t n = node_count(p, path);
  std::vector<double> x = number_array(p, path, "x");
  std::vector<double> y = number_array(p, path, "y");
  check_length(p, path, "x", x.size(), n);
  check_length(p, path, "y", y.size(), n);
  grid_for(n, p, path);
  double t = p.doc.contains("time") ? number(p, path, "time") : 0.0;
  return CurveState::from_points(std::move(x), std::move(y), t);
}

IntrinsicState intrinsic_from(const Parsed& p, const std::string& path) {
  std::size_t n = node_count(p, path);
  IntrinsicState s{grid_for(n, p, path), number_array(p, path, "g"),
                   number_array(p, path, "kappa"), number(p, path, "theta0"), {}, 0.0};
  check_length(p, path, "g", s.g.size(), n);
  check_length(p, path, "kappa", s.kappa.size(), n);
  std::vector<double> anchor = number_array(p, path, "gamma0");
  check_length(p, path, "gamma0", anchor.size(), 2);
  s.gamma0 = {anchor[0], anchor[1]};
  s.time = p.doc.contains("time") ? number(p, path, "time") : 0.0;
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string curve_to_json(const CurveState& curve) {
  std::string out = "{\"n\":" + std::to_string(curve.size()) +
                    ",\"time\":" + format_double(curve.time) + ",\"x\":";
  append_array(out, curve.x);
  out += ",\"y\":";
  append_array(out, curve.y);
  out += "}\n";
  return out;
}

std::string intrinsic_to_json(const IntrinsicState& state) {
  std::string out = "{\"n\":" + std::to_string(state.g.size()) +
                    ",\"time\":" + format_double(state.time) + ",\"g\":";
  append_array(out, state.g);
  out += ",\"kappa\":";
  append_array(out, state.kappa);
  out += ",\"theta0\":" + format_double(state.theta0) + ",\"gamma0\":[" +
         format_double(state.gamma0.x) + ',' + format_double(state.gamma0.y) + "]}\n";
  return out;
}

void save_curve(const CurveState& curve, const std::string& path) {
  write_text(path, curve_to_json(curve));
}

void save_intrinsic(const IntrinsicState& state, const std::string& path) {
  write_text(path, intrinsic_to_json(state));
}

CurveState load_curve(const std::string& path) { return curve_from(parse_file(path), path); }

IntrinsicState load_intrinsic(const std::string& path) {
  return intrinsic_from(parse_file(path), path);
}

AnySnapshot load_snapshot(const std::string& path) {
  Parsed p = parse_file(path);
  if (p.doc.contains("kappa")) return intrinsic_from(p, path);
  return curve_from(p, path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvWriter::CsvWriter(const std::string& path, std::initializer_list<const char*> header)
    : out_(path, std::ios::binary), path_(path), columns_(header.size()) {
  if (!out_) throw InputError("cannot write " + path);
  bool first = true;
  for (const char* h : header) {
    if (!first) out_ << ',';
    out_ << h;
    first = false;
  }
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
  row(std::span<const double>(values.begin(), values.size()));
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) throw std::logic_error("csv row width mismatch in " + path_);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out_ << ',';
    out_ << format_double(values[k]);
  }
  out_ << '\n';
}

}  // namespace patchlab
