#pragma once

// Name tables for PE header enumerations and flag words. Flag names drop
// the IMAGE_FILE_ / IMAGE_DLLCHARACTERISTICS_ / IMAGE_SCN_ prefixes;
// machine and subsystem names keep theirs.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ember::pe {

struct NamedValue {
  std::uint32_t value;
  std::string_view name;
};

inline constexpr std::array<std::string_view, 16> kDataDirectoryNames = {
    "EXPORT",       "IMPORT",    "RESOURCE",  "EXCEPTION",   "SECURITY", "BASERELOC",
    "DEBUG",        "ARCHITECTURE", "GLOBALPTR", "TLS",      "LOAD_CONFIG", "BOUND_IMPORT",
    "IAT",          "DELAY_IMPORT", "CLR_RUNTIME_HEADER", "RESERVED"};

enum DataDirectory : std::size_t {
  kDirExport = 0,
  kDirImport = 1,
  kDirResource = 2,
  kDirException = 3,
  kDirSecurity = 4,
  kDirBaseReloc = 5,
  kDirDebug = 6,
  kDirArchitecture = 7,
  kDirGlobalPtr = 8,
  kDirTls = 9,
  kDirLoadConfig = 10,
  kDirBoundImport = 11,
  kDirIat = 12,
  kDirDelayImport = 13,
  kDirClr = 14,
  kDirReserved = 15,
};

inline constexpr NamedValue kMachines[] = {
    {0x0, "IMAGE_FILE_MACHINE_UNKNOWN"},    {0x14c, "IMAGE_FILE_MACHINE_I386"},
    {0x162, "IMAGE_FILE_MACHINE_R3000"},    {0x166, "IMAGE_FILE_MACHINE_R4000"},
    {0x168, "IMAGE_FILE_MACHINE_R10000"},   {0x169, "IMAGE_FILE_MACHINE_WCEMIPSV2"},
    {0x184, "IMAGE_FILE_MACHINE_ALPHA"},    {0x1a2, "IMAGE_FILE_MACHINE_SH3"},
    {0x1a3, "IMAGE_FILE_MACHINE_SH3DSP"},   {0x1a4, "IMAGE_FILE_MACHINE_SH3E"},
    {0x1a6, "IMAGE_FILE_MACHINE_SH4"},      {0x1a8, "IMAGE_FILE_MACHINE_SH5"},
    {0x1c0, "IMAGE_FILE_MACHINE_ARM"},      {0x1c2, "IMAGE_FILE_MACHINE_THUMB"},
    {0x1c4, "IMAGE_FILE_MACHINE_ARMNT"},    {0x1d3, "IMAGE_FILE_MACHINE_AM33"},
    {0x1f0, "IMAGE_FILE_MACHINE_POWERPC"},  {0x1f1, "IMAGE_FILE_MACHINE_POWERPCFP"},
    {0x200, "IMAGE_FILE_MACHINE_IA64"},     {0x266, "IMAGE_FILE_MACHINE_MIPS16"},
    {0x284, "IMAGE_FILE_MACHINE_ALPHA64"},  {0x366, "IMAGE_FILE_MACHINE_MIPSFPU"},
    {0x466, "IMAGE_FILE_MACHINE_MIPSFPU16"}, {0x520, "IMAGE_FILE_MACHINE_TRICORE"},
    {0xcef, "IMAGE_FILE_MACHINE_CEF"},      {0xebc, "IMAGE_FILE_MACHINE_EBC"},
    {0x5032, "IMAGE_FILE_MACHINE_RISCV32"}, {0x5064, "IMAGE_FILE_MACHINE_RISCV64"},
    {0x5128, "IMAGE_FILE_MACHINE_RISCV128"}, {0x6232, "IMAGE_FILE_MACHINE_LOONGARCH32"},
    {0x6264, "IMAGE_FILE_MACHINE_LOONGARCH64"}, {0x8664, "IMAGE_FILE_MACHINE_AMD64"},
    {0x9041, "IMAGE_FILE_MACHINE_M32R"},    {0xaa64, "IMAGE_FILE_MACHINE_ARM64"},
    {0xc0ee, "IMAGE_FILE_MACHINE_CEE"},
};

inline constexpr NamedValue kSubsystems[] = {
    {0, "IMAGE_SUBSYSTEM_UNKNOWN"},
    {1, "IMAGE_SUBSYSTEM_NATIVE"},
    {2, "IMAGE_SUBSYSTEM_WINDOWS_GUI"},
    {3, "IMAGE_SUBSYSTEM_WINDOWS_CUI"},
    {5, "IMAGE_SUBSYSTEM_OS2_CUI"},
    {7, "IMAGE_SUBSYSTEM_POSIX_CUI"},
    {8, "IMAGE_SUBSYSTEM_NATIVE_WINDOWS"},
    {9, "IMAGE_SUBSYSTEM_WINDOWS_CE_GUI"},
    {10, "IMAGE_SUBSYSTEM_EFI_APPLICATION"},
    {11, "IMAGE_SUBSYSTEM_EFI_BOOT_SERVICE_DRIVER"},
    {12, "IMAGE_SUBSYSTEM_EFI_RUNTIME_DRIVER"},
    {13, "IMAGE_SUBSYSTEM_EFI_ROM"},
    {14, "IMAGE_SUBSYSTEM_XBOX"},
    {16, "IMAGE_SUBSYSTEM_WINDOWS_BOOT_APPLICATION"},
};

inline constexpr NamedValue kCoffCharacteristics[] = {
    {0x0001, "RELOCS_STRIPPED"},   {0x0002, "EXECUTABLE_IMAGE"},        {0x0004, "LINE_NUMS_STRIPPED"},
    {0x0008, "LOCAL_SYMS_STRIPPED"}, {0x0010, "AGGRESIVE_WS_TRIM"},     {0x0020, "LARGE_ADDRESS_AWARE"},
    {0x0040, "16BIT_MACHINE"},     {0x0080, "BYTES_REVERSED_LO"},       {0x0100, "32BIT_MACHINE"},
    {0x0200, "DEBUG_STRIPPED"},    {0x0400, "REMOVABLE_RUN_FROM_SWAP"}, {0x0800, "NET_RUN_FROM_SWAP"},
    {0x1000, "SYSTEM"},            {0x2000, "DLL"},                     {0x4000, "UP_SYSTEM_ONLY"},
    {0x8000, "BYTES_REVERSED_HI"},
};

inline constexpr NamedValue kDllCharacteristics[] = {
    {0x0020, "HIGH_ENTROPY_VA"}, {0x0040, "DYNAMIC_BASE"},  {0x0080, "FORCE_INTEGRITY"},
    {0x0100, "NX_COMPAT"},       {0x0200, "NO_ISOLATION"},  {0x0400, "NO_SEH"},
    {0x0800, "NO_BIND"},         {0x1000, "APPCONTAINER"},  {0x2000, "WDM_DRIVER"},
    {0x4000, "GUARD_CF"},        {0x8000, "TERMINAL_SERVER_AWARE"},
};

inline constexpr NamedValue kSectionFlags[] = {
    {0x00000008, "TYPE_NO_PAD"},          {0x00000020, "CNT_CODE"},
    {0x00000040, "CNT_INITIALIZED_DATA"}, {0x00000080, "CNT_UNINITIALIZED_DATA"},
    {0x00000100, "LNK_OTHER"},            {0x00000200, "LNK_INFO"},
    {0x00000800, "LNK_REMOVE"},           {0x00001000, "LNK_COMDAT"},
    {0x00008000, "GPREL"},                {0x00020000, "MEM_PURGEABLE"},
    {0x00040000, "MEM_LOCKED"},           {0x00080000, "MEM_PRELOAD"},
    {0x01000000, "LNK_NRELOC_OVFL"},      {0x02000000, "MEM_DISCARDABLE"},
    {0x04000000, "MEM_NOT_CACHED"},       {0x08000000, "MEM_NOT_PAGED"},
    {0x10000000, "MEM_SHARED"},           {0x20000000, "MEM_EXECUTE"},
    {0x40000000, "MEM_READ"},             {0x80000000, "MEM_WRITE"},
};

inline std::string_view lookup_name(std::span<const NamedValue> table, std::uint32_t value,
                                    std::string_view fallback) {
  for (const auto& nv : table) {
    if (nv.value == value) return nv.name;
  }
  return fallback;
}

inline std::optional<std::uint32_t> lookup_value(std::span<const NamedValue> table, std::string_view name) {
  for (const auto& nv : table) {
    if (nv.name == name) return nv.value;
  }
  return std::nullopt;
}

inline std::vector<std::string> flag_names(std::span<const NamedValue> table, std::uint32_t word) {
  std::vector<std::string> names;
  for (const auto& nv : table) {
    if ((word & nv.value) == nv.value && nv.value != 0) names.emplace_back(nv.name);
  }
  return names;
}

}  // namespace ember::pe
