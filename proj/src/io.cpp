#include "spectra/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace spectra {

using nlohmann::json;

namespace {

json matrix_to_json(const SymSparse& M)
{
    json arr = json::array();
    for (const auto& e : M.entries())
        arr.push_back({e.row + 1, e.col + 1, e.value});
    return arr;
}

[[noreturn]] void bad(const std::string& what) { fail(ErrorKind::parse, "shadow document: " + what); }

int get_int(const json& j, const char* key)
{
    if (!j.contains(key) || !j.at(key).is_number_integer())
        bad(std::string("missing integer field '") + key + "'");
    return j.at(key).get<int>();
}

SymSparse matrix_from_json(const json& arr, int size)
{
    if (!arr.is_array())
        bad("matrix must be an array of [row, col, value] triples");
    std::vector<SymSparse::Entry> entries;
    for (const json& t : arr) {
        if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer() ||
            !t[2].is_number())
            bad("matrix entry must be [row, col, value]");
        int r = t[0].get<int>(), c = t[1].get<int>();
        double v = t[2].get<double>();
        if (r < 1 || c > size)
            bad("entry index out of range");
        if (r > c)
            bad("entry below the diagonal (row > col)");
        if (!std::isfinite(v))
            bad("non-finite value");
        entries.push_back({r - 1, c - 1, v});
    }
    try {
        return SymSparse(size, std::move(entries));
    } catch (const Error& e) {
        bad(e.what());
    }
}

std::vector<SymSparse> list_from_json(const json& blk, const char* key, int count, int size)
{
    if (!blk.contains(key) || !blk.at(key).is_array())
        bad(std::string("block field '") + key + "' must be an array");
    const json& arr = blk.at(key);
    if (static_cast<int>(arr.size()) != count)
        bad(std::string("block field '") + key + "' has the wrong number of matrices");
    std::vector<SymSparse> out;
    for (const json& M : arr)
        out.push_back(matrix_from_json(M, size));
    return out;
}

} // namespace

std::string serialize(const Shadow& S)
{
    json doc;
    doc["version"] = 1;
    doc["n"] = S.n();
    doc["m"] = S.m();
    json blocks = json::array();
    for (const auto& blk : S.blocks()) {
        json b;
        b["size"] = blk.size;
        b["lambda"] = matrix_to_json(blk.lambda);
        json a = json::array();
        for (const auto& M : blk.a)
            a.push_back(matrix_to_json(M));
        b["a"] = std::move(a);
        json bb = json::array();
        for (const auto& M : blk.b)
            bb.push_back(matrix_to_json(M));
        b["b"] = std::move(bb);
        blocks.push_back(std::move(b));
    }
    doc["blocks"] = std::move(blocks);
    return doc.dump();
}

Shadow deserialize(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        bad(e.what());
    }
    if (!doc.is_object())
        bad("top level must be an object");
    if (get_int(doc, "version") != 1)
        bad("unsupported version");
    int n = get_int(doc, "n"), m = get_int(doc, "m");
    if (n < 0 || m < 0)
        bad("negative dimension");
    if (!doc.contains("blocks") || !doc.at("blocks").is_array() || doc.at("blocks").empty())
        bad("'blocks' must be a nonempty array");
    std::vector<BlockGroup> blocks;
    for (const json& jb : doc.at("blocks")) {
        if (!jb.is_object())
            bad("block must be an object");
        BlockGroup blk;
        blk.size = get_int(jb, "size");
        if (blk.size < 1)
            bad("block size must be positive");
        if (!jb.contains("lambda"))
            bad("block without 'lambda'");
        blk.lambda = matrix_from_json(jb.at("lambda"), blk.size);
        blk.a = list_from_json(jb, "a", n, blk.size);
        blk.b = list_from_json(jb, "b", m, blk.size);
        blocks.push_back(std::move(blk));
    }
    return Shadow(n, m, std::move(blocks));
}

std::size_t set_bytes(const Shadow& S) { return serialize(S).size(); }

Shadow read_shadow_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::parse, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

void write_shadow_file(const std::string& path, const Shadow& S)
{
    std::ofstream out(path);
    if (!out)
        fail(ErrorKind::parse, "cannot write " + path);
    out << serialize(S) << '\n';
}

} // namespace spectra
