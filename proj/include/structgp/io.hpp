#pragma once

// File formats: dataset CSV (`patient,task,time,value`, 1-based ids) and the
// JSON encodings of Theta and Dag. Reals are written with 17 significant
// digits so a write/read cycle is lossless.

#include "structgp/model.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>

namespace structgp {

Dataset read_dataset_csv(std::istream& in, int k = 0);
Dataset read_dataset_csv_file(const std::string& path, int k = 0);
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv_file(const std::string& path, const Dataset& data);

nlohmann::json theta_to_json(const Theta& theta);
Theta theta_from_json(const nlohmann::json& j);

/// {"k": int, "edges": [[from, to], ...]} with 1-based node ids.
nlohmann::json dag_to_json(const Dag& g);
Dag dag_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

/// printf-style %.17g.
std::string format_real(double x);

}  // namespace structgp
