#include "mocoguard/instance_io.hpp"

#include <fstream>

#include "mocoguard/errors.hpp"

namespace mocoguard {

using nlohmann::json;

json instance_to_json(const Instance& inst) {
    json rows = json::array();
    for (std::size_t r = 0; r < inst.features.rows; ++r) {
        const auto span = inst.features.row_span(r);
        rows.push_back(std::vector<double>(span.begin(), span.end()));
    }
    json j;
    j["id"] = inst.id;
    j["kind"] = to_string(inst.kind);
    j["n"] = inst.size();
    j["features"] = std::move(rows);
    if (inst.kind == ProblemKind::BiCVRP) j["demands"] = inst.demands;
    if (inst.kind != ProblemKind::BiTSP && inst.kind != ProblemKind::TriTSP) j["capacity"] = inst.capacity;
    j["provenance"] = to_string(inst.provenance);
    return j;
}

Instance instance_from_json(const json& j) {
    Instance inst;
    try {
        inst.id = j.at("id").get<std::string>();
        inst.kind = problem_kind_from_string(j.at("kind").get<std::string>());
        inst.provenance = provenance_from_string(j.at("provenance").get<std::string>());
        const auto& rows = j.at("features");
        if (!rows.is_array() || rows.empty()) throw SchemaError("features must be a non-empty array of rows");
        const std::size_t cols = rows.front().size();
        inst.features = Matrix(rows.size(), cols);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != cols) throw SchemaError("ragged feature rows");
            for (std::size_t c = 0; c < cols; ++c) inst.features(r, c) = rows[r][c].get<double>();
        }
        if (j.contains("demands")) inst.demands = j.at("demands").get<std::vector<double>>();
        if (j.contains("capacity")) inst.capacity = j.at("capacity").get<double>();
        if (j.at("n").get<std::size_t>() != inst.size()) throw SchemaError("field n does not match features");
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed instance record: ") + e.what());
    } catch (const ConfigError& e) {
        throw SchemaError(e.what());
    }
    validate_instance(inst);
    return inst;
}

std::string instance_to_line(const Instance& inst) { return instance_to_json(inst).dump(); }

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + path.string());
    for (const auto& r : records) out << r.dump() << '\n';
}

void write_instances(const std::filesystem::path& path, const std::vector<Instance>& instances) {
    std::vector<json> records;
    records.reserve(instances.size());
    for (const auto& inst : instances) records.push_back(instance_to_json(inst));
    write_jsonl(path, records);
}

std::vector<Instance> read_instances(const std::filesystem::path& path) {
    std::vector<Instance> out;
    for (const auto& j : read_jsonl(path)) out.push_back(instance_from_json(j));
    return out;
}

}  // namespace mocoguard
