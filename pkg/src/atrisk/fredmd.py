"""Reference tables for the FRED-MD monthly database.

Group membership follows the FRED-MD appendix. Mnemonics change slightly
between vintages, so every table here can be overridden from the run
configuration.
"""

from __future__ import annotations

from enum import Enum


class Sector(str, Enum):
    OUTPUT_INCOME = "Output & Income"
    LABOR_MARKET = "Labor Market"
    HOUSING = "Housing"
    CONSUMPTION_ORDERS = "Consumption & Orders"
    MONEY_CREDIT = "Money & Credit"
    INTEREST_RATES = "Interest Rates & Spreads"
    PRICES = "Prices"
    STOCK_MARKET = "Stock Market"

    @classmethod
    def parse(cls, value: "str | Sector") -> "Sector":
        if isinstance(value, cls):
            return value
        for member in cls:
            if value in (member.value, member.name, member.name.lower()):
                return member
        raise ValueError(f"unknown sector {value!r}; expected one of {[m.value for m in cls]}")


_GROUPS: dict[Sector, tuple[str, ...]] = {
    Sector.OUTPUT_INCOME: (
        "RPI", "W875RX1", "INDPRO", "IPFPNSS", "IPFINAL", "IPCONGD", "IPDCONGD",
        "IPNCONGD", "IPBUSEQ", "IPMAT", "IPDMAT", "IPNMAT", "IPMANSICS",
        "IPB51222S", "IPFUELS", "CUMFNS",
    ),
    Sector.LABOR_MARKET: (
        "HWI", "HWIURATIO", "CLF16OV", "CE16OV", "UNRATE", "UEMPMEAN", "UEMPLT5",
        "UEMP5TO14", "UEMP15OV", "UEMP15T26", "UEMP27OV", "CLAIMSx", "PAYEMS",
        "USGOOD", "CES1021000001", "USCONS", "MANEMP", "DMANEMP", "NDMANEMP",
        "SRVPRD", "USTPU", "USWTRADE", "USTRADE", "USFIRE", "USGOVT",
        "CES0600000007", "AWOTMAN", "AWHMAN", "CES0600000008", "CES2000000008",
        "CES3000000008",
    ),
    Sector.HOUSING: (
        "HOUST", "HOUSTNE", "HOUSTMW", "HOUSTS", "HOUSTW", "PERMIT", "PERMITNE",
        "PERMITMW", "PERMITS", "PERMITW",
    ),
    Sector.CONSUMPTION_ORDERS: (
        "DPCERA3M086SBEA", "CMRMTSPLx", "RETAILx", "ACOGNO", "AMDMNOx", "ANDENOx",
        "AMDMUOx", "BUSINVx", "ISRATIOx", "UMCSENTx",
    ),
    Sector.MONEY_CREDIT: (
        "M1SL", "M2SL", "M2REAL", "BOGMBASE", "AMBSL", "TOTRESNS", "NONBORRES",
        "BUSLOANS", "REALLN", "NONREVSL", "CONSPI", "MZMSL", "DTCOLNVHFNM",
        "DTCTHFNM", "INVEST",
    ),
    Sector.INTEREST_RATES: (
        "FEDFUNDS", "CP3Mx", "TB3MS", "TB6MS", "GS1", "GS5", "GS10", "AAA", "BAA",
        "COMPAPFFx", "TB3SMFFM", "TB6SMFFM", "T1YFFM", "T5YFFM", "T10YFFM",
        "AAAFFM", "BAAFFM", "TWEXAFEGSMTHx", "TWEXMMTH", "EXSZUSx", "EXJPUSx",
        "EXUSUKx", "EXCAUSx",
    ),
    Sector.PRICES: (
        "WPSFD49207", "WPSFD49502", "WPSID61", "WPSID62", "OILPRICEx", "PPICMM",
        "CPIAUCSL", "CPIAPPSL", "CPITRNSL", "CPIMEDSL", "CUSR0000SAC",
        "CUSR0000SAD", "CUSR0000SAS", "CPIULFSL", "CUSR0000SA0L2",
        "CUSR0000SA0L5", "PCEPI", "DDURRG3M086SBEA", "DNDGRG3M086SBEA",
        "DSERRG3M086SBEA",
    ),
    Sector.STOCK_MARKET: (
        "S&P 500", "S&P: indust", "S&P div yield", "S&P PE ratio", "VIXCLSx",
    ),
}

SECTOR_OF: dict[str, Sector] = {sid: sector for sector, ids in _GROUPS.items() for sid in ids}

# Series that are irregular after transformation or mostly missing.
DEFAULT_EXCLUSIONS: tuple[str, ...] = ("ACOGNO", "TWEXAFEGSMTHx", "UMCSENTx", "OILPRICEx")

# Counter-cyclical series shipped as sign overrides.
COUNTER_CYCLICAL: tuple[str, ...] = (
    "UNRATE",      # U: all
    "UEMPMEAN",    # U: mean duration
    "UEMPLT5",     # U < 5 wks
    "UEMP5TO14",   # U 5-14 wks
    "UEMP15OV",    # U 15+ wks
    "UEMP15T26",   # U 15-26 wks
    "UEMP27OV",    # U 27+ wks
    "CLAIMSx",     # UI claims
    "ISRATIOx",    # M&T invent/sales
    "VIXCLSx",     # CBOE volatility index
)

DEFAULT_SIGN_OVERRIDES: dict[str, int] = {sid: -1 for sid in COUNTER_CYCLICAL}

# Display names used in tables -> FRED-MD mnemonics.
ALIASES: dict[str, str] = {
    "10 yr-FF spread": "T10YFFM",
    "5 yr-FF spread": "T5YFFM",
    "1 yr-FF spread": "T1YFFM",
    "6 mo-FF spread": "TB6SMFFM",
    "3 mo-FF spread": "TB3SMFFM",
    "Aaa-FF spread": "AAAFFM",
    "Baa-FF spread": "BAAFFM",
    "CP-FF spread": "COMPAPFFx",
    "Emp: total": "PAYEMS",
    "Emp: mfg": "MANEMP",
    "Avg hrs: mfg": "AWHMAN",
    "UI claims": "CLAIMSx",
    "U: all": "UNRATE",
    "IP: total": "INDPRO",
    "PI": "RPI",
    "Starts: nonfarm": "HOUST",
    "Retail sales": "RETAILx",
    "M2 (real)": "M2REAL",
    "S&P 500": "S&P 500",
    "S&P div yield": "S&P div yield",
    "M&T invent/sales": "ISRATIOx",
    "VIX": "VIXCLSx",
}

BUILTIN_SUBSETS: dict[str, tuple[str, ...]] = {
    "univariate_spread": ("T10YFFM",),
    "parsimonious10": (
        "T10YFFM", "BAAFFM", "PAYEMS", "CLAIMSx", "UNRATE", "INDPRO", "HOUST",
        "RETAILx", "S&P 500", "M2REAL",
    ),
    "spreads8": (
        "T10YFFM", "T5YFFM", "T1YFFM", "TB6SMFFM", "TB3SMFFM", "AAAFFM", "BAAFFM",
        "COMPAPFFx",
    ),
    "real8": (
        "PAYEMS", "CLAIMSx", "AWHMAN", "UNRATE", "INDPRO", "RPI", "HOUST", "RETAILx",
    ),
}
