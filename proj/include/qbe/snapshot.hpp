#pragma once

#include <bit>
#include <fstream>
#include <string>

#include <json.hpp>

#include "qbe/errors.hpp"
#include "qbe/field.hpp"

namespace qbe {

static_assert(std::endian::native == std::endian::little,
              "snapshot payload is little-endian float64");

struct Snapshot {
  Field field;
  double time = 0.0;
  Params params;
};

inline const char* payload_name(PayloadKind k) {
  switch (k) {
    case PayloadKind::scalar: return "scalar";
    case PayloadKind::vec3: return "vec3";
    case PayloadKind::qtensor: return "qtensor";
  }
  return "?";
}

/// Field snapshot: one line of JSON header followed by the raw row-major
/// float64 component arrays in declaration order.
inline void write_snapshot(const std::string& path, const Field& f, double time,
                           const Params& p) {
  nlohmann::json header = {
      {"magic", "qbe-snapshot"},
      {"version", 1},
      {"n", f.grid.n},
      {"kind", payload_name(f.kind)},
      {"time", time},
      {"params",
       {{"eps", p.eps},
        {"xi", p.xi},
        {"kappa", p.kappa},
        {"a", p.a},
        {"b", p.b},
        {"c", p.c}}},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw snapshot_error("cannot open " + path + " for writing");
  out << header.dump() << '\n';
  for (const auto& comp : f.c)
    out.write(reinterpret_cast<const char*>(comp.data()),
              std::streamsize(comp.size() * sizeof(double)));
}

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw snapshot_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw snapshot_error("missing header: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw snapshot_error("unparseable header: " + std::string(e.what()));
  }
  if (header.value("magic", "") != "qbe-snapshot")
    throw snapshot_error("bad magic in " + path);
  if (header.value("version", -1) != 1)
    throw snapshot_error("unsupported snapshot version in " + path);
  std::string kind_name = header.value("kind", "");
  PayloadKind kind;
  if (kind_name == "scalar")
    kind = PayloadKind::scalar;
  else if (kind_name == "vec3")
    kind = PayloadKind::vec3;
  else if (kind_name == "qtensor")
    kind = PayloadKind::qtensor;
  else
    throw snapshot_error("unknown payload kind '" + kind_name + "' in " + path);

  Snapshot s;
  int n = header.value("n", 0);
  s.field = Field(Grid(n), kind);
  s.time = header.value("time", 0.0);
  if (header.contains("params")) {
    const auto& jp = header["params"];
    s.params.eps = jp.value("eps", 1.0);
    s.params.xi = jp.value("xi", 0.0);
    s.params.kappa = jp.value("kappa", 1.0);
    s.params.a = jp.value("a", 0.0);
    s.params.b = jp.value("b", 1.0);
    s.params.c = jp.value("c", 1.0);
  }
  for (auto& comp : s.field.c) {
    in.read(reinterpret_cast<char*>(comp.data()),
            std::streamsize(comp.size() * sizeof(double)));
    if (std::size_t(in.gcount()) != comp.size() * sizeof(double))
      throw snapshot_error("payload size mismatch in " + path);
  }
  // trailing bytes also indicate a header/payload mismatch
  char extra;
  if (in.read(&extra, 1))
    throw snapshot_error("payload size mismatch in " + path);
  return s;
}

}  // namespace qbe
