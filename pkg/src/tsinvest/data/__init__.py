from .schema import (FEATURES, FEATURE_NAMES, NUMERIC_FEATURES,
                     CATEGORICAL_FEATURE, CATEGORICAL_COLUMN, LOG_FEATURES,
                     SENTINEL, PANEL_LENGTH, MIN_OBSERVED_MONTHS,
                     FeatureDescriptor, schema_hash)
from .records import (RawCompanyRecord, CompanyPanel, month_index,
                      load_dataset, save_dataset, load_panels, save_panels)
from .vocab import CategoryVocabulary, UNKNOWN_INDEX, MISSING_INDEX
from .pipeline import (align_monthly, impute_total_funding, impute_valuation,
                       log_scale, filter_short_series, fill_sentinel_and_pad,
                       build_panel, build_panels, training_vocabulary)
from .split import DatasetSplit, investor_centric_split
