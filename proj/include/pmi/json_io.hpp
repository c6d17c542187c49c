#pragma once

#include <string>

#include <json.hpp>

#include "pmi/certificate.hpp"
#include "pmi/hierarchy.hpp"
#include "pmi/measure.hpp"
#include "pmi/momentseq.hpp"
#include "pmi/polymatrix.hpp"
#include "pmi/verify.hpp"

namespace pmi {

using Json = nlohmann::json;

// Thrown on any schema violation; the message carries a JSON-pointer-style
// location so the CLI can print line-anchored diagnostics.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

PolyMatrix<Rat> parse_polymatrix(const Json& j, const std::string& where);
Json polymatrix_to_json(const PolyMatrix<Rat>& M);
Json polymatrix_to_json(const PolyMatrix<double>& M);

MeasureSpec parse_measure(const Json& j, const std::string& where);
Json measure_to_json(const MeasureSpec& nu);

PMIProblem parse_problem(const Json& j);
RelaxationOrder parse_order(const Json& j, const std::string& where);

Json certificate_to_json(const SOSCertificate<double>& cert);
SOSCertificate<double> parse_certificate(const Json& j);

Json moment_seq_to_json(const MomentSeq<double>& seq);
MomentSeq<double> parse_moment_seq(const Json& j);

Json bmp_report_to_json(const BmpReport& rep);
Json verify_report_to_json(const VerifyReport& rep);
Json grid_report_to_json(const GridReport& rep);
Json propmain_report_to_json(const PropMainReport& rep);
Json solve_report_to_json(const SolveReport& rep);

Json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace pmi
