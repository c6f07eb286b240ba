from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="MACRODIV_", env_file=".env", extra="ignore")

    # Monte Carlo
    SEED: int = 20240601
    MC_CHUNK: int = 65536
    MC_WORKERS: int = 1

    # Degeneracy policy
    EPS_REL: float = 1e-6
    JITTER_DELTA: float = 1e-4
    ROUNDOFF_TOL: float = 1e-9

    # Quadrature oracles
    QUAD_ABS_TOL: float = 1e-12
    QUAD_REL_TOL: float = 1e-10
    QUAD_LIMIT: int = 200
    GL_NODES: int = 64

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_JSON: bool = False


settings = Settings()
