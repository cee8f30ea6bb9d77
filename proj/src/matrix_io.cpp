// Copyright 2026 The ustruct authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ustruct/matrix_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace ustruct {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return doc;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      row.push_back({m(i, j).real(), m(i, j).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, const std::string& where) {
  if (!rows.is_array() || rows.empty()) {
    throw ParseError(where + ": matrix must be a nonempty array of rows");
  }
  const size_t n_rows = rows.size();
  size_t n_cols = 0;
  Matrix m;
  for (size_t i = 0; i < n_rows; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || row.empty()) {
      throw ParseError(where + ": rows must be nonempty arrays");
    }
    if (i == 0) {
      n_cols = row.size();
      m = Matrix(n_rows, n_cols);
    } else if (row.size() != n_cols) {
      throw ParseError(where + ": ragged matrix rows");
    }
    for (size_t j = 0; j < n_cols; ++j) {
      const json& entry = row[j];
      if (!entry.is_array() || entry.size() != 2 ||
          !entry[0].is_number() || !entry[1].is_number()) {
        throw ParseError(where + ": entries must be [re, im] pairs");
      }
      m(i, j) = Complex(entry[0].get<double>(), entry[1].get<double>());
    }
  }
  if (!m.allFinite()) {
    throw ParseError(where + ": entries must be finite");
  }
  return m;
}

}  // namespace

MatrixFile load_matrix_file(const std::string& path) {
  const json doc = parse_file(path);
  if (!doc.is_object() || !doc.contains("d_A") || !doc.contains("d_B") ||
      !doc.contains("matrix")) {
    throw ParseError(path + ": expected d_A, d_B and matrix fields");
  }
  MatrixFile file;
  if (!doc["d_A"].is_number_integer() || !doc["d_B"].is_number_integer()) {
    throw ParseError(path + ": d_A and d_B must be integers");
  }
  file.d_a = doc["d_A"].get<int>();
  file.d_b = doc["d_B"].get<int>();
  if (file.d_a < 1 || file.d_b < 1) {
    throw ParseError(path + ": dimensions must be positive");
  }
  file.matrix = matrix_from_json(doc["matrix"], path);
  const int d = file.d_a * file.d_b;
  if (file.matrix.rows() != d || file.matrix.cols() != d) {
    throw ParseError(path + ": matrix is not (d_A*d_B)-square");
  }
  if (doc.contains("metadata")) {
    const json& meta = doc["metadata"];
    if (meta.contains("name")) file.name = meta["name"].get<std::string>();
    if (meta.contains("description")) {
      file.description = meta["description"].get<std::string>();
    }
  }
  return file;
}

std::string matrix_file_to_string(const MatrixFile& file) {
  json doc;
  doc["d_A"] = file.d_a;
  doc["d_B"] = file.d_b;
  doc["matrix"] = matrix_to_json(file.matrix);
  if (!file.name.empty() || !file.description.empty()) {
    json meta;
    if (!file.name.empty()) meta["name"] = file.name;
    if (!file.description.empty()) meta["description"] = file.description;
    doc["metadata"] = std::move(meta);
  }
  return doc.dump(2) + "\n";
}

void save_matrix_file(const MatrixFile& file, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << matrix_file_to_string(file);
}

Matrix load_square_matrix(const std::string& path) {
  const json doc = parse_file(path);
  if (!doc.is_object() || !doc.contains("matrix")) {
    throw ParseError(path + ": expected a matrix field");
  }
  Matrix m = matrix_from_json(doc["matrix"], path);
  if (m.rows() != m.cols()) {
    throw ParseError(path + ": matrix must be square");
  }
  return m;
}

SLWitness load_witness_file(const std::string& path) {
  const json doc = parse_file(path);
  if (!doc.is_object() || !doc.contains("s_ops") || !doc.contains("t_ops")) {
    throw ParseError(path + ": expected s_ops and t_ops fields");
  }
  SLWitness witness;
  for (const char* key : {"s_ops", "t_ops"}) {
    const json& list = doc[key];
    if (!list.is_array() || list.empty()) {
      throw ParseError(path + ": " + key + " must be a nonempty array");
    }
    for (const json& entry : list) {
      Matrix m = matrix_from_json(entry, path);
      if (m.rows() != m.cols()) {
        throw ParseError(path + ": witness operators must be square");
      }
      (std::string(key) == "s_ops" ? witness.s_ops : witness.t_ops)
          .push_back(std::move(m));
    }
  }
  if (witness.s_ops.size() != witness.t_ops.size()) {
    throw ParseError(path + ": s_ops and t_ops must pair up per party");
  }
  return witness;
}

PureState load_state_file(const std::string& path) {
  const json doc = parse_file(path);
  if (!doc.is_object() || !doc.contains("subsystems") ||
      !doc.contains("amplitudes")) {
    throw ParseError(path + ": expected subsystems and amplitudes fields");
  }
  std::vector<Subsystem> subsystems;
  for (const json& s : doc["subsystems"]) {
    if (!s.is_object() || !s.contains("label") || !s.contains("dim")) {
      throw ParseError(path + ": subsystems need label and dim");
    }
    subsystems.push_back(
        {s["label"].get<std::string>(), s["dim"].get<int>()});
  }
  const json& amp_json = doc["amplitudes"];
  if (!amp_json.is_array()) {
    throw ParseError(path + ": amplitudes must be an array");
  }
  Vector amp(amp_json.size());
  for (size_t i = 0; i < amp_json.size(); ++i) {
    const json& entry = amp_json[i];
    if (!entry.is_array() || entry.size() != 2) {
      throw ParseError(path + ": amplitudes must be [re, im] pairs");
    }
    amp(i) = Complex(entry[0].get<double>(), entry[1].get<double>());
  }
  try {
    return PureState(std::move(subsystems), std::move(amp));
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_state_file(const PureState& state, const std::string& path) {
  json doc;
  doc["subsystems"] = json::array();
  for (const Subsystem& s : state.subsystems()) {
    doc["subsystems"].push_back({{"label", s.label}, {"dim", s.dim}});
  }
  json amp = json::array();
  for (int i = 0; i < state.dim(); ++i) {
    amp.push_back(
        {state.amplitudes()(i).real(), state.amplitudes()(i).imag()});
  }
  doc["amplitudes"] = std::move(amp);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace ustruct
