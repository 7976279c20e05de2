#include "ncb/json_io.hpp"

#include <fstream>
#include <sstream>

namespace ncb {

Json matrix_to_json(const Mat& m) {
  Json data = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    data.push_back(std::move(row));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Mat matrix_from_json(const Json& j, const std::string& context) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    throw Error(context + ": expected object with rows, cols, data");
  }
  const auto rows = j.at("rows").get<long>();
  const auto cols = j.at("cols").get<long>();
  if (rows <= 0 || cols <= 0) throw DimensionError(context + ": rows and cols must be positive");
  const Json& data = j.at("data");
  if (!data.is_array() || static_cast<long>(data.size()) != rows) {
    throw DimensionError(context + ": data must hold " + std::to_string(rows) + " rows");
  }
  Mat m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    const Json& row = data[r];
    if (!row.is_array() || static_cast<long>(row.size()) != cols) {
      throw DimensionError(context + ": row " + std::to_string(r) + " must hold " +
                           std::to_string(cols) + " entries");
    }
    for (long c = 0; c < cols; ++c) {
      const Json& z = row[c];
      if (z.is_number()) {
        m(r, c) = Scalar(z.get<double>(), 0.0);
      } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
        m(r, c) = Scalar(z[0].get<double>(), z[1].get<double>());
      } else {
        throw Error(context + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                    ") must be [re, im]");
      }
    }
  }
  require_finite(m, context);
  return m;
}

Json complex_to_json(Scalar z) { return Json::array({z.real(), z.imag()}); }

namespace {

std::vector<Mat> matrix_list(const Json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw Error("expected \"" + key + "\" to be a list of matrices");
  std::vector<Mat> out;
  for (std::size_t i = 0; i < j.at(key).size(); ++i)
    out.push_back(matrix_from_json(j.at(key)[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

Json matrix_array(const std::vector<Mat>& ms) {
  Json out = Json::array();
  for (const Mat& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

}  // namespace

Json system_to_json(const OperatorSystem& s) {
  return Json{{"ambient_dim", s.ambient_dim}, {"generators", matrix_array(s.generators)}};
}

OperatorSystem system_from_json(const Json& j, const Tolerance& tol) {
  if (!j.is_object() || !j.contains("ambient_dim")) throw Error("operator system: expected \"ambient_dim\"");
  const auto l = j.at("ambient_dim").get<long>();
  if (l <= 0) throw DimensionError("operator system: ambient_dim must be positive");
  return build_operator_system(matrix_list(j, "generators"), l, tol);
}

Json ucp_to_json(const UcpMap& phi) {
  Json out{{"target_dim", phi.target_dim}, {"values", matrix_array(phi.values)}};
  if (phi.choi) out["choi"] = matrix_to_json(*phi.choi);
  return out;
}

Json cp_to_json(const CpCone& psi) {
  Json out{{"target_dim", psi.target_dim}, {"scale", psi.scale}, {"values", matrix_array(psi.values)}};
  if (psi.choi) out["choi"] = matrix_to_json(*psi.choi);
  return out;
}

UcpMap ucp_from_json(const Json& j, SystemPtr domain, const Tolerance& tol) {
  if (!j.is_object() || !j.contains("target_dim")) throw Error("ucp map: expected \"target_dim\"");
  const auto n = j.at("target_dim").get<long>();
  if (n <= 0) throw DimensionError("ucp map: target_dim must be positive");
  if (j.contains("choi")) return ucp_from_choi(std::move(domain), n, matrix_from_json(j.at("choi"), "choi"), tol);
  if (j.contains("kraus")) return ucp_from_kraus(std::move(domain), matrix_list(j, "kraus"), tol);
  return make_ucp(std::move(domain), matrix_list(j, "values"), std::nullopt, tol);
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // byte offset -> line/column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": parse error: " << e.what();
    throw Error(os.str());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

}  // namespace ncb
