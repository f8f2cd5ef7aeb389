from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # Flow backend
    FLOW_BACKEND: str = "variational"
    FLOW_PYRAMID_LEVELS: int = 4
    FLOW_SMOOTHNESS: float = 0.05
    FLOW_ITERATIONS: int = 200
    FLOW_TOLERANCE: float = 1e-3
    FLOW_WARPS_PER_LEVEL: int = 3
    FB_TOLERANCE_PX: float = 1.0

    # Template / inpainting
    MAX_OUTER: int = 2
    WINDOW: int = 7
    INPAINT_BETA: float = 0.05
    MASK_ALPHA: float = 0.1
    MAX_SAMPLE_FRAMES: int = 20

    # Execution
    THREADS: int = 0
    RESULTS_DB_PATH: str = "warehouse/benchmarks.duckdb"

    # Misc
    LOG_LEVEL: str = "INFO"


settings = Settings()
