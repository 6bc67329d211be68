#pragma once

// Message prefixes emitted by the PE parser, one per warning category.
// Each must stay identical to its entry in data/warnings_v3.tsv.

#include <string_view>
#include <utility>

namespace ember::pe::msg {

inline constexpr std::string_view dos_header_truncated = "Unable to read the DOS Header, possibly a truncated file.";
inline constexpr std::string_view dos_magic_missing = "DOS Header magic not found.";
inline constexpr std::string_view lfanew_invalid = "Invalid e_lfanew value, probably not a PE file";
inline constexpr std::string_view nt_signature_invalid = "Invalid NT Headers signature.";
inline constexpr std::string_view nt_signature_ne = "Invalid NT Headers signature. Probably a NE file";
inline constexpr std::string_view nt_signature_le = "Invalid NT Headers signature. Probably a LE file";
inline constexpr std::string_view nt_signature_lx = "Invalid NT Headers signature. Probably a LX file";
inline constexpr std::string_view nt_signature_te = "Invalid NT Headers signature. Probably a TE file";
inline constexpr std::string_view file_header_truncated = "Unable to read the FILE_HEADER";
inline constexpr std::string_view machine_unknown = "Unknown machine type";
inline constexpr std::string_view no_sections = "The file has no sections";
inline constexpr std::string_view too_many_sections = "Too many sections";
inline constexpr std::string_view optional_header_truncated = "Unable to read the OPTIONAL_HEADER";
inline constexpr std::string_view optional_header_magic = "Invalid OPTIONAL_HEADER magic";
inline constexpr std::string_view sizeof_optional_header_small = "SizeOfOptionalHeader is smaller than the optional header";
inline constexpr std::string_view sizeof_optional_header_eof = "SizeOfOptionalHeader points beyond the end of the file";
inline constexpr std::string_view rvas_and_sizes_suspicious = "Suspicious NumberOfRvaAndSizes in the Optional Header.";
inline constexpr std::string_view data_directory_truncated = "Unable to read the data directory table";
inline constexpr std::string_view section_alignment_small = "SectionAlignment is smaller than FileAlignment";
inline constexpr std::string_view file_alignment_invalid = "FileAlignment is not a power of 2";
inline constexpr std::string_view file_alignment_range = "FileAlignment is outside the range 0x200 to 0x10000";
inline constexpr std::string_view section_alignment_invalid = "SectionAlignment is not a power of 2";
inline constexpr std::string_view image_base_unaligned = "ImageBase is not a multiple of 64K";
inline constexpr std::string_view image_base_zero = "ImageBase is zero";
inline constexpr std::string_view entrypoint_zero = "AddressOfEntryPoint is zero";
inline constexpr std::string_view entrypoint_outside = "AddressOfEntryPoint lies outside the sections' boundaries.";
inline constexpr std::string_view entrypoint_in_header = "AddressOfEntryPoint lies inside the headers";
inline constexpr std::string_view entrypoint_not_executable = "Entrypoint section is not marked executable";
inline constexpr std::string_view sizeof_headers_unaligned = "SizeOfHeaders is not a multiple of FileAlignment";
inline constexpr std::string_view sizeof_headers_eof = "SizeOfHeaders is larger than the file";
inline constexpr std::string_view sizeof_image_unaligned = "SizeOfImage is not a multiple of SectionAlignment";
inline constexpr std::string_view sizeof_image_small = "SizeOfImage is smaller than the extent of the sections";
inline constexpr std::string_view checksum_mismatch = "The optional header checksum does not match the computed checksum";
inline constexpr std::string_view section_table_truncated = "Error parsing the section table, it is truncated";
inline constexpr std::string_view section_count_mismatch = "The number of sections read differs from NumberOfSections";
inline constexpr std::string_view section_name_nonprintable = "Section name contains non-printable characters";
inline constexpr std::string_view section_raw_pointer_eof = "PointerToRawData points beyond the end of the file.";
inline constexpr std::string_view section_raw_size_eof = "SizeOfRawData is larger than file.";
inline constexpr std::string_view section_vsize_large = "VirtualSize is extremely large > 256MiB.";
inline constexpr std::string_view section_va_unaligned = "VirtualAddress is not a multiple of SectionAlignment.";
inline constexpr std::string_view section_raw_unaligned = "PointerToRawData should normally be a multiple of FileAlignment";
inline constexpr std::string_view section_empty = "Section has no raw data and no virtual size";
inline constexpr std::string_view section_virtual_overlap = "Sections overlap in virtual memory";
inline constexpr std::string_view section_raw_overlap = "Sections overlap in the file";
inline constexpr std::string_view section_write_execute = "Both IMAGE_SCN_MEM_WRITE and IMAGE_SCN_MEM_EXECUTE are set.";
inline constexpr std::string_view import_directory_invalid = "Error parsing the import directory. Invalid Import data at RVA";
inline constexpr std::string_view import_descriptor_limit = "Too many import descriptors";
inline constexpr std::string_view import_library_name_invalid = "Error parsing the import directory. Invalid import library name";
inline constexpr std::string_view import_thunks_invalid = "Error parsing the import table. Invalid data at RVA";
inline constexpr std::string_view import_thunks_limit = "Import thunk table is too long or loops";
inline constexpr std::string_view import_symbol_name_invalid = "Error parsing the import table. Invalid symbol name";
inline constexpr std::string_view import_ordinal_invalid = "Import by ordinal with reserved bits set";
inline constexpr std::string_view delay_import_invalid = "Error parsing the Delay import directory at RVA";
inline constexpr std::string_view delay_import_attributes = "Delay import descriptor uses virtual addresses";
inline constexpr std::string_view bound_import_invalid = "Error parsing the bound import directory";
inline constexpr std::string_view export_directory_invalid = "Error parsing export directory at RVA";
inline constexpr std::string_view export_functions_rva = "RVA AddressOfFunctions in the export directory points to an invalid address";
inline constexpr std::string_view export_names_rva = "RVA AddressOfNames in the export directory points to an invalid address";
inline constexpr std::string_view export_ordinals_rva = "RVA AddressOfNameOrdinals in the export directory points to an invalid address";
inline constexpr std::string_view export_repeated_entries = "Export directory contains more than 10 repeated entries";
inline constexpr std::string_view export_name_invalid = "Error parsing export name";
inline constexpr std::string_view export_ordinal_range = "Export name ordinal is out of range";
inline constexpr std::string_view export_count_suspicious = "Export directory NumberOfNames exceeds NumberOfFunctions";
inline constexpr std::string_view relocation_invalid = "Invalid relocation information. Can't read data at RVA";
inline constexpr std::string_view relocation_block_size = "Invalid relocation information. SizeOfBlock";
inline constexpr std::string_view relocation_type_invalid = "Invalid relocation type";
inline constexpr std::string_view debug_invalid = "Invalid debug information. Can't read data at RVA";
inline constexpr std::string_view debug_size = "Debug directory size is not a multiple of the entry size";
inline constexpr std::string_view tls_invalid = "Invalid TLS information. Can't read data at RVA";
inline constexpr std::string_view tls_callbacks_invalid = "Error parsing TLS callbacks";
inline constexpr std::string_view load_config_invalid = "Invalid LOAD_CONFIG information. Can't read data at RVA";
inline constexpr std::string_view load_config_size = "LOAD_CONFIG Size field disagrees with the directory size";
inline constexpr std::string_view dynamic_relocation_invalid = "Invalid IMAGE_DYNAMIC_RELOCATION_TABLE information";
inline constexpr std::string_view resource_invalid = "Invalid resources directory. Can't read directory data at RVA";
inline constexpr std::string_view resource_loop = "Resource directory tree loops or is too deep";
inline constexpr std::string_view resource_entries_limit = "Too many resource directory entries";
inline constexpr std::string_view security_directory_invalid = "The security directory points outside the file";
inline constexpr std::string_view certificate_invalid = "Error parsing the certificate table";
inline constexpr std::string_view certificate_revision = "Unsupported WIN_CERTIFICATE revision";
inline constexpr std::string_view certificate_type = "Unsupported WIN_CERTIFICATE type";
inline constexpr std::string_view authenticode_invalid = "Error parsing the Authenticode signature";
inline constexpr std::string_view rich_checksum_mismatch = "Rich Header checksum mismatch";
inline constexpr std::string_view rich_header_malformed = "Rich Header is malformed";
inline constexpr std::string_view directory_outside_image = "Data directory entry points outside the image";
inline constexpr std::string_view directory_not_file_backed = "Data directory entry is not backed by file data";
inline constexpr std::string_view clr_header_invalid = "Invalid CLR runtime header";
inline constexpr std::string_view overlay_truncated = "The file is truncated below the section data";

inline constexpr std::pair<std::string_view, std::string_view> kAll[] = {
    {"dos_header_truncated", dos_header_truncated},
    {"dos_magic_missing", dos_magic_missing},
    {"lfanew_invalid", lfanew_invalid},
    {"nt_signature_invalid", nt_signature_invalid},
    {"nt_signature_ne", nt_signature_ne},
    {"nt_signature_le", nt_signature_le},
    {"nt_signature_lx", nt_signature_lx},
    {"nt_signature_te", nt_signature_te},
    {"file_header_truncated", file_header_truncated},
    {"machine_unknown", machine_unknown},
    {"no_sections", no_sections},
    {"too_many_sections", too_many_sections},
    {"optional_header_truncated", optional_header_truncated},
    {"optional_header_magic", optional_header_magic},
    {"sizeof_optional_header_small", sizeof_optional_header_small},
    {"sizeof_optional_header_eof", sizeof_optional_header_eof},
    {"rvas_and_sizes_suspicious", rvas_and_sizes_suspicious},
    {"data_directory_truncated", data_directory_truncated},
    {"section_alignment_small", section_alignment_small},
    {"file_alignment_invalid", file_alignment_invalid},
    {"file_alignment_range", file_alignment_range},
    {"section_alignment_invalid", section_alignment_invalid},
    {"image_base_unaligned", image_base_unaligned},
    {"image_base_zero", image_base_zero},
    {"entrypoint_zero", entrypoint_zero},
    {"entrypoint_outside", entrypoint_outside},
    {"entrypoint_in_header", entrypoint_in_header},
    {"entrypoint_not_executable", entrypoint_not_executable},
    {"sizeof_headers_unaligned", sizeof_headers_unaligned},
    {"sizeof_headers_eof", sizeof_headers_eof},
    {"sizeof_image_unaligned", sizeof_image_unaligned},
    {"sizeof_image_small", sizeof_image_small},
    {"checksum_mismatch", checksum_mismatch},
    {"section_table_truncated", section_table_truncated},
    {"section_count_mismatch", section_count_mismatch},
    {"section_name_nonprintable", section_name_nonprintable},
    {"section_raw_pointer_eof", section_raw_pointer_eof},
    {"section_raw_size_eof", section_raw_size_eof},
    {"section_vsize_large", section_vsize_large},
    {"section_va_unaligned", section_va_unaligned},
    {"section_raw_unaligned", section_raw_unaligned},
    {"section_empty", section_empty},
    {"section_virtual_overlap", section_virtual_overlap},
    {"section_raw_overlap", section_raw_overlap},
    {"section_write_execute", section_write_execute},
    {"import_directory_invalid", import_directory_invalid},
    {"import_descriptor_limit", import_descriptor_limit},
    {"import_library_name_invalid", import_library_name_invalid},
    {"import_thunks_invalid", import_thunks_invalid},
    {"import_thunks_limit", import_thunks_limit},
    {"import_symbol_name_invalid", import_symbol_name_invalid},
    {"import_ordinal_invalid", import_ordinal_invalid},
    {"delay_import_invalid", delay_import_invalid},
    {"delay_import_attributes", delay_import_attributes},
    {"bound_import_invalid", bound_import_invalid},
    {"export_directory_invalid", export_directory_invalid},
    {"export_functions_rva", export_functions_rva},
    {"export_names_rva", export_names_rva},
    {"export_ordinals_rva", export_ordinals_rva},
    {"export_repeated_entries", export_repeated_entries},
    {"export_name_invalid", export_name_invalid},
    {"export_ordinal_range", export_ordinal_range},
    {"export_count_suspicious", export_count_suspicious},
    {"relocation_invalid", relocation_invalid},
    {"relocation_block_size", relocation_block_size},
    {"relocation_type_invalid", relocation_type_invalid},
    {"debug_invalid", debug_invalid},
    {"debug_size", debug_size},
    {"tls_invalid", tls_invalid},
    {"tls_callbacks_invalid", tls_callbacks_invalid},
    {"load_config_invalid", load_config_invalid},
    {"load_config_size", load_config_size},
    {"dynamic_relocation_invalid", dynamic_relocation_invalid},
    {"resource_invalid", resource_invalid},
    {"resource_loop", resource_loop},
    {"resource_entries_limit", resource_entries_limit},
    {"security_directory_invalid", security_directory_invalid},
    {"certificate_invalid", certificate_invalid},
    {"certificate_revision", certificate_revision},
    {"certificate_type", certificate_type},
    {"authenticode_invalid", authenticode_invalid},
    {"rich_checksum_mismatch", rich_checksum_mismatch},
    {"rich_header_malformed", rich_header_malformed},
    {"directory_outside_image", directory_outside_image},
    {"directory_not_file_backed", directory_not_file_backed},
    {"clr_header_invalid", clr_header_invalid},
    {"overlay_truncated", overlay_truncated},
};

}  // namespace ember::pe::msg
