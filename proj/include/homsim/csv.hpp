#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "homsim/counting.hpp"
#include "homsim/errors.hpp"
#include "homsim/interference.hpp"

// CSV output (period decimal separator, header row, LF endings) and the
// scan reader used by the fit command. Numeric formatting goes through one
// routine so repeated runs are byte-identical.

namespace homsim {

inline std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

inline std::string scan_to_csv(const HomScan& scan) {
    std::string out = "delay_ps,coincidence_probability\n";
    for (std::size_t k = 0; k < scan.values.size(); ++k) {
        out += format_number(scan.delays_ps[k]);
        out += ',';
        out += format_number(scan.values[k]);
        out += '\n';
    }
    return out;
}

inline std::string tally_to_csv(const TallyResult& tally) {
    std::string out = "delay_ps,raw_counts,background,net_counts,error\n";
    for (const DelayTally& p : tally.points) {
        out += format_number(p.delay_ps);
        out += ',';
        out += std::to_string(p.raw);
        out += ',';
        out += format_number(p.background);
        out += ',';
        out += format_number(p.net);
        out += ',';
        out += format_number(p.error);
        out += '\n';
    }
    return out;
}

// Reads a scan from CSV text with a delay column and a value column
// (probability or counts); a third column, when present, is taken as the
// per-point error. Parse problems report the 1-based row number.
inline HomScan scan_from_csv(std::istream& in) {
    HomScan scan;
    std::string line;
    std::size_t row = 0;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 2)
            throw CsvParseError("csv row " + std::to_string(row) +
                                ": expected at least 2 comma-separated columns");

        if (!header_skipped) {
            // A non-numeric first field marks the header row.
            char* end = nullptr;
            std::strtod(fields[0].c_str(), &end);
            header_skipped = true;
            if (end == fields[0].c_str()) continue;
        }

        std::vector<double> numbers;
        for (std::size_t c = 0; c < fields.size() && c < 5; ++c) {
            char* end = nullptr;
            const double v = std::strtod(fields[c].c_str(), &end);
            if (end == fields[c].c_str())
                throw CsvParseError("csv row " + std::to_string(row) + ": column " +
                                    std::to_string(c + 1) + " is not numeric");
            numbers.push_back(v);
        }
        scan.delays_ps.push_back(numbers[0]);
        if (numbers.size() >= 5) {
            // montecarlo layout: delay, raw, background, net, error
            scan.values.push_back(numbers[3]);
            scan.errors.push_back(numbers[4]);
        } else {
            scan.values.push_back(numbers[1]);
            if (numbers.size() >= 3) scan.errors.push_back(numbers[2]);
        }
    }
    if (scan.values.empty()) throw CsvParseError("csv: no data rows");
    if (!scan.errors.empty() && scan.errors.size() != scan.values.size())
        throw CsvParseError("csv: inconsistent error column");
    return scan;
}

inline HomScan scan_from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvParseError("csv: cannot open " + path);
    return scan_from_csv(in);
}

}  // namespace homsim
