#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dse {

/// Comma-separated table with a header row and no quoting. Lines end in
/// "\n"; a trailing "\r" is tolerated on input.
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column, or -1.
    int column(std::string_view name) const;
};

/// Throws ParseError on ragged rows or an empty document.
CsvTable parse_csv(std::string_view text);
std::string write_csv(const CsvTable& table);

}  // namespace dse
