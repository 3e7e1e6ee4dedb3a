#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapereg/cellular.hpp"
#include "shapereg/maca.hpp"

namespace shapereg {

// File-backed store mapping object class labels to the CA rule that models
// the class plus the MACA attractor signature that recognizes it.
//
// One record per line:
//   label <tab> gene-payload-hex <tab> maca-rule-vector <tab> pef-positions <tab> pef-signature
//
// The line format carries no depth field; on load, depth takes its documented
// default of n.

struct RuleEntry {
    std::string label;
    Gene gene;
    MACAConfig config;
    std::vector<std::uint8_t> pef_signature;

    void validate() const {
        if (label.empty()) throw std::invalid_argument("RuleEntry: empty label");
        if (label.find('\t') != std::string::npos || label.find('\n') != std::string::npos)
            throw std::invalid_argument("RuleEntry: label must not contain tabs or newlines");
        gene.validate();
        config.validate();
        if (pef_signature.size() != config.pef_positions.size())
            throw std::invalid_argument("RuleEntry: signature length must equal pef position count");
    }
};

struct ShapeRuleDB {
    std::map<std::string, RuleEntry> entries; // keyed by label; sorted => stable serialization

    void add(const RuleEntry& e) {
        e.validate();
        if (entries.count(e.label))
            throw std::invalid_argument("duplicate label: " + e.label);
        entries.emplace(e.label, e);
    }

    const RuleEntry* find(const std::string& label) const {
        auto it = entries.find(label);
        return it == entries.end() ? nullptr : &it->second;
    }

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

namespace rule_db_detail {

inline std::string gene_to_hex(const Gene& g) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (std::uint8_t b : g.payload_bytes()) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

inline Gene gene_from_hex(const std::string& hex) {
    if (hex.size() != Gene::kEntryCount * 16)
        throw std::invalid_argument("gene payload hex has wrong length");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("bad hex digit in gene payload");
    };
    Gene g;
    for (int i = 0; i < Gene::kEntryCount; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) {
            const int hi = nibble(hex[static_cast<std::size_t>(i) * 16 + 2 * b]);
            const int lo = nibble(hex[static_cast<std::size_t>(i) * 16 + 2 * b + 1]);
            bits |= static_cast<std::uint64_t>(hi << 4 | lo) << (8 * b);
        }
        double v;
        std::memcpy(&v, &bits, 8);
        if (i < 19)
            g.set_entry(i, v);
        else
            g.dt = v; // bypass the set_entry clamp; validate() checks the range
    }
    return g;
}

template <class T>
std::string join_ints(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(static_cast<long long>(v[i]));
    }
    return out;
}

inline std::vector<long long> split_ints(const std::string& s) {
    std::vector<long long> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) throw std::invalid_argument("empty integer field");
        out.push_back(std::stoll(tok));
    }
    return out;
}

} // namespace rule_db_detail

inline void save_rule_db(const std::string& path, const ShapeRuleDB& db) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& [label, e] : db.entries) {
        out << label << '\t' << rule_db_detail::gene_to_hex(e.gene) << '\t'
            << rule_db_detail::join_ints(e.config.rules) << '\t'
            << rule_db_detail::join_ints(e.config.pef_positions) << '\t';
        for (auto b : e.pef_signature) out << (b ? '1' : '0');
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline ShapeRuleDB load_rule_db(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    ShapeRuleDB db;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fail = [&](const std::string& why) -> std::runtime_error {
            return std::runtime_error("malformed rule DB at " + path + ":" +
                                      std::to_string(lineno) + ": " + why);
        };
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 5) throw fail("expected 5 tab-separated fields");
        RuleEntry e;
        e.label = fields[0];
        try {
            e.gene = rule_db_detail::gene_from_hex(fields[1]);
            const auto rules = rule_db_detail::split_ints(fields[2]);
            const auto positions = rule_db_detail::split_ints(fields[3]);
            e.config.n = static_cast<int>(rules.size());
            e.config.depth = e.config.n; // format carries no depth; documented default
            for (long long r : rules) e.config.rules.push_back(static_cast<std::uint8_t>(r));
            for (long long p : positions) e.config.pef_positions.push_back(static_cast<int>(p));
            for (char c : fields[4]) {
                if (c != '0' && c != '1') throw std::invalid_argument("signature must be 0/1");
                e.pef_signature.push_back(c == '1' ? 1 : 0);
            }
            e.validate();
        } catch (const std::exception& ex) {
            throw fail(ex.what());
        }
        try {
            db.add(e);
        } catch (const std::exception& ex) {
            throw fail(ex.what());
        }
    }
    return db;
}

// Attractor PEF bits matched by exact equality against same-family DB entries.
inline ClassifyResult maca_classify(const BitPattern& pattern, const MACAConfig& cfg,
                                    const ShapeRuleDB& db) {
    if (db.empty()) throw std::invalid_argument("maca_classify: empty rule DB");
    const AttractorResult att = maca_attractor(pattern, cfg);
    ClassifyResult res;
    res.pef_bits = extract_pef_bits(att.representative, cfg);
    for (const auto& [label, e] : db.entries) {
        if (!e.config.same_family(cfg)) continue;
        if (e.pef_signature == res.pef_bits) {
            res.label = label;
            return res;
        }
    }
    return res;
}

} // namespace shapereg
