#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nilcube/cubespace.hpp"
#include "nilcube/hk.hpp"

namespace nilcube::cli {

// Parse errors carry the position of the offending text (1-based).
class ParseError : public Error {
 public:
  ParseError(std::string file, int line, int column, const std::string& what)
      : Error(ErrorKind::Parse, what), file_(std::move(file)), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }
  std::string diagnostic() const;

 private:
  std::string file_;
  int line_, column_;
};

// Line-oriented config: `[section]` headers, `key = value` entries and, in
// sections that allow it, bare data lines. `#` starts a comment.
struct IniEntry {
  std::string key, value;
  int line = 0, key_column = 0, value_column = 0;
};
struct IniLine {
  std::string text;
  int line = 0, column = 0;
};
struct IniSection {
  std::string name;
  int line = 0;
  std::vector<IniEntry> entries;
  std::vector<IniLine> data;
};
struct IniDocument {
  std::string file;
  std::vector<IniSection> sections;  // entries before any header go to a section named ""
};

// Sections whose names start with one of `data_sections` keep bare lines as
// data; elsewhere a line without '=' is an error.
IniDocument parse_ini(const std::string& text, const std::string& file, const std::vector<std::string>& data_sections);

struct Caps {
  int max_dim = 3;
  std::size_t max_points = 81;        // translation enumeration
  std::size_t cube_cap = 2'000'000;   // largest cube list built
  std::uint64_t node_budget = 20'000'000;
};

// Overrides caps from a string like "max_dim=3,cube_cap=100000" (the
// NILCUBE_CAPS environment variable).
Caps caps_from_env(const char* value, Caps base = {});

struct SpaceSpec {
  std::string kind;  // dk, heisenberg-nilmanifold, abelian-nilmanifold, table
  std::string name;
  std::vector<std::int64_t> moduli;
  std::int64_t modulus = 0;
  std::optional<int> degree;
  std::vector<std::vector<std::int64_t>> lattice;             // generator coordinates
  // levels[i] = generators of G_{i+2}; nullopt means the whole group
  std::vector<std::optional<std::vector<std::vector<std::int64_t>>>> levels;
  std::size_t points = 0;
  std::vector<std::vector<Configuration>> cubes;               // table kind, index = dimension
  Caps caps;
};

SpaceSpec parse_space_spec(const std::string& text, const std::string& file, const Caps& defaults);

struct BuiltSpace {
  CubeSpacePtr space;
  std::optional<NilmanifoldSpace> nilmanifold;  // for the nilmanifold kinds
};
BuiltSpace build_space(const SpaceSpec& spec);

}  // namespace nilcube::cli
